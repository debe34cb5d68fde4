use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbo-lab"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("DBO_LAB_JOBS")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap()
}

/// Data rows of a CSV file, metadata and header stripped.
fn records(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').filter_map(|c| c.parse().ok()).collect())
        .collect()
}

#[test]
fn alpha_out_of_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["evolve", "--alpha", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[0, 2]"));
}

#[test]
fn unknown_regime_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["dyadic", "--regime", "sideways"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_flag_value_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["heat", "--alpha"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["nosuch"]).status.code(), Some(1));
}

#[test]
fn zero_data_gives_a_zero_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["evolve", "--u0", "zero", "--n", "64", "--L", "20", "--T", "0.05", "--every", "5"]);
    assert!(out.status.success());
    let rows = records(&read(dir.path(), "evolve.csv"));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[1..].iter().all(|&v| v == 0.0)));
}

#[test]
fn evolve_trace_does_not_gain_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["evolve", "--alpha", "1.5", "--s", "-0.3", "--n", "512", "--L", "100", "--dt", "1e-3", "--T", "0.2", "--every", "1"],
    );
    assert!(out.status.success());
    let text = read(dir.path(), "evolve.csv");
    assert!(text.starts_with("# dbo-lab "));
    assert!(text.contains("\n# config {"));
    let rows = records(&text);
    assert_eq!(rows.len(), 201);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] + 10.0 * 1e-6));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["xnorm", "--check", "equivalence", "--trials", "6", "--seed", "11"];
    assert!(run(a.path(), &args).status.success());
    assert!(run(b.path(), &args).status.success());
    assert_eq!(read(a.path(), "xnorm.csv"), read(b.path(), "xnorm.csv"));
    let args = ["dyadic", "--regime", "pp", "--samples", "3", "--resolution", "8", "--trials", "3", "--seed", "5"];
    assert!(run(a.path(), &args).status.success());
    assert!(run(b.path(), &args).status.success());
    assert_eq!(read(a.path(), "dyadic.csv"), read(b.path(), "dyadic.csv"));
}

#[test]
fn thread_count_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["dyadic", "--regime", "high", "--samples", "4", "--resolution", "8", "--trials", "4"];
    let one: Vec<&str> = args.iter().copied().chain(["--jobs", "1"]).collect();
    let three: Vec<&str> = args.iter().copied().chain(["--jobs", "3"]).collect();
    assert!(run(a.path(), &one).status.success());
    assert!(run(b.path(), &three).status.success());
    assert_eq!(read(a.path(), "dyadic.csv"), read(b.path(), "dyadic.csv"));
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# heat run\nalpha = 1.5\nrho = 0.5   # smoothing order\ncount = 6\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = run(dir.path(), &["heat", "--config", cfg, "--rho", "1", "--name", "h"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(dir.path(), "h.csv");
    let line = text.lines().find(|l| l.starts_with("# config ")).unwrap();
    let config: serde_json::Value = serde_json::from_str(&line["# config ".len()..]).unwrap();
    assert_eq!(config["alpha"], 1.5);
    assert_eq!(config["rho"], 1.0);
    assert_eq!(config["count"], 6);
    assert_eq!(config["p"], 2.0);
    assert_eq!(records(&text).len(), 6);
}

#[test]
fn bad_config_line_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "alpha 1.5\n").unwrap();
    let out = run(dir.path(), &["heat", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn heat_run_writes_fit_and_script() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["heat", "--alpha", "2", "--rho", "1", "--p", "2"]).status.success());
    let fit: serde_json::Value = serde_json::from_str(&read(dir.path(), "heat.json")).unwrap();
    assert!((fit["slope"].as_f64().unwrap() + 0.75).abs() < 0.02);
    assert!(fit["version"].is_string());
    let gp = read(dir.path(), "heat.gp");
    assert!(gp.starts_with("# dbo-lab ") && gp.contains("logscale xy") && gp.contains("heat.csv"));
}

#[test]
fn vanishing_blocks_measure_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["dyadic", "--regime", "vanish", "--samples", "10", "--resolution", "16"]);
    assert!(out.status.success());
    let text = read(dir.path(), "dyadic.csv");
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().all(|l| l.split(',').nth(8) == Some("0.0")));
}

#[test]
fn picard_agrees_with_the_stepper() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["picard", "--alpha", "2", "--T", "0.25", "--u0", "gaussian"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "picard.json")).unwrap();
    let tol = v["tol"].as_f64().unwrap();
    assert!(v["residual"].as_f64().unwrap() < 2.0 * tol);
    assert!(v["etd_difference"].as_f64().unwrap() < 1e-6);
    assert!(v["iterations"].as_u64().unwrap() >= 2);
}

#[test]
fn picard_cap_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["picard", "--T", "0.25", "--max-iter", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(records(&read(dir.path(), "picard.csv")).len(), 2);
}

#[test]
fn second_iterate_scan_inflates() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["inflate", "--variant", "second", "--alpha", "0.5", "--s", "0", "--eps", "0.05", "--Nmin", "64", "--Nmax", "4096"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value = serde_json::from_str(&read(dir.path(), "inflate.json")).unwrap();
    assert!((fit["slope"].as_f64().unwrap() - 0.20).abs() < 0.10);
    assert_eq!(fit["verdict"], "inflation");
    assert_eq!(records(&read(dir.path(), "inflate.csv")).len(), 7);
    assert!(read(dir.path(), "inflate.gp").contains("predicted slope"));
}

#[test]
fn plancherel_probe_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["xnorm", "--check", "plancherel", "--trials", "4"]);
    assert!(out.status.success());
    assert!(records(&read(dir.path(), "xnorm.csv")).iter().all(|r| (r[5] - 1.0).abs() < 1e-10));
}
