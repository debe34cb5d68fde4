//! Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use dbo_lab::dyadic::{
    estimate_block_norm, resonance, sample_spec, EstimateConfig, FrequencyTriple, MultiplierEstimate, Regime,
};
use dbo_lab::evolution::{evolve_etd, l2_decay_report, picard_solve, EvolveConfig};
use dbo_lab::iterates::{inflation_scan, two_path_check, InflationScan, IterateConfig, Variant};
use dbo_lab::semigroup::{apply_semigroup, dyadic_times, heat_kernel_value, semigroup_multiplier, smoothing_law_sweep, DissipationParams};
use dbo_lab::spectral::{FourierGrid, SpectralField};
use dbo_lab::xnorm::{contract_factor_check, xbs_equivalence_check, xbs_norm, SpaceTimeField, TimeWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, notes: Vec::new() }
    }
}

fn gaussian(n: usize, period: f64, amp: f64) -> SpectralField {
    let grid = FourierGrid::new(n, period).unwrap();
    SpectralField::from_fn(grid, |x| amp * (-(x - period / 2.0).powi(2)).exp())
}

fn resonance_identity() -> Outcome {
    const COUNT: usize = 1_000_000;
    // multiples of 2^-30 below 2^21, so the third entry is exact
    let quantum = 2f64.powi(-30);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_identity = 0.0f64;
    let mut worst_bracket = 0.0f64;
    for _ in 0..COUNT {
        let mut draw = || {
            let mag = (10f64.powf(rng.gen_range(-3.0..6.0)) / quantum).round() * quantum;
            if rng.gen_bool(0.5) { mag } else { -mag }
        };
        let (a, b) = (draw(), draw());
        let t = FrequencyTriple::new(a, b, -(a + b)).unwrap();
        let h = resonance(&t).abs();
        let mut m = [a, b, -(a + b)];
        m.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
        // the two entries of smaller magnitude share a sign
        let exact = 2.0 * (m[0] * m[1]).abs();
        let (n_min, n_max) = (m[0].abs(), m[2].abs());
        worst_identity = worst_identity.max((h - exact).abs() / exact);
        let below = (n_min * n_max - h) / (n_min * n_max);
        let above = (h - 2.0 * n_min * n_max) / (n_min * n_max);
        worst_bracket = worst_bracket.max(below).max(above);
    }
    Outcome::new(
        worst_identity <= 1e-12 && worst_bracket <= 1e-12,
        format!("{COUNT} triples, relative identity defect {worst_identity:.1e}, bracket excess {worst_bracket:.1e}"),
    )
}

fn semigroup_laws() -> Outcome {
    let grid = FourierGrid::new(4096, 64.0 * PI).unwrap();
    let f = SpectralField::from_fn(grid, |x| (-(x - 32.0 * PI).powi(2) / 4.0).exp() * (1.0 + 0.3 * (3.0 * x).sin()));
    let mut worst = 0.0f64;
    let mut monotone = true;
    for alpha in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let p = DissipationParams::new(alpha).unwrap();
        let scale = f.hs_norm(0.0);
        let id = apply_semigroup(&f, 0.0, p);
        worst = worst.max(id.sub(&f).unwrap().hs_norm(0.0) / scale);
        for (s, t) in [(0.1, 0.2), (0.5, 0.25), (1.0, 1.0)] {
            let two = apply_semigroup(&apply_semigroup(&f, s, p), t, p);
            let one = apply_semigroup(&f, s + t, p);
            worst = worst.max(two.sub(&one).unwrap().hs_norm(0.0) / scale);
        }
        let norms: Vec<f64> = [0.0, 0.1, 0.2, 0.5, 1.0, 2.0]
            .iter()
            .map(|&t| apply_semigroup(&f, t, p).hs_norm(0.0))
            .collect();
        monotone &= norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        for xi in grid.frequencies() {
            for t in [0.01, 0.3, 1.7] {
                // the zero mode is never damped
                let rate = if xi == 0.0 { 0.0 } else { xi.abs().powf(alpha) };
                let heat = (-rate * t).exp();
                worst = worst.max((semigroup_multiplier(xi, t, alpha).norm() - heat).abs());
            }
        }
    }
    Outcome::new(worst <= 1e-12 && monotone, format!("largest defect {worst:.1e} on 4096 modes, damping monotone: {monotone}"))
}

fn heat_smoothing() -> Outcome {
    let ts = dyadic_times(2, 8);
    let ps = [1.0, 2.0, 4.0, f64::INFINITY];
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for alpha in [1.25, 1.5, 2.0] {
        for rho in [0.0, 0.5, 1.0] {
            let fits = smoothing_law_sweep(rho, &ps, alpha, &ts).unwrap();
            for (fit, &p) in fits.iter().zip(&ps) {
                let predicted = -(1.0 - 1.0 / p) / alpha - rho / alpha;
                let err = (fit.slope() - predicted).abs();
                if err > worst {
                    notes = vec![format!("worst at alpha={alpha} rho={rho} p={p}: slope {:.4} vs {predicted:.4}", fit.slope())];
                }
                worst = worst.max(err);
            }
        }
    }
    let mut gauss = 0.0f64;
    for t in [0.05, 0.3, 1.0, 4.0] {
        for x in [0.0, 0.4, 1.3, 3.0, 7.5] {
            let exact = (4.0 * PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp();
            gauss = gauss.max((heat_kernel_value(t, x, 2.0).unwrap() - exact).abs());
        }
    }
    let mut out = Outcome::new(
        worst <= 0.03 && gauss <= 1e-6,
        format!("36 slopes within {worst:.4} (tol 0.03), Gaussian values within {gauss:.1e} (tol 1e-6)"),
    );
    out.notes = notes;
    out
}

fn l2_decay() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [1.25, 1.5, 2.0] {
        let u0 = gaussian(256, 16.0 * PI, 0.5);
        let residual = |dt: f64| {
            let cfg = EvolveConfig::new(alpha, dt, 0.5).unwrap();
            let traj = evolve_etd(&u0, &cfg).unwrap();
            let report = l2_decay_report(&traj, alpha, 0.0).unwrap();
            (report.max_excess(10.0 * dt * dt), report.max_abs_residual())
        };
        let (excess_a, res_a) = residual(2e-3);
        let (excess_b, res_b) = residual(1e-3);
        let order = (res_a / res_b).log2();
        pass &= excess_a <= 0.0 && excess_b <= 0.0 && order >= 1.8;
        parts.push(format!("alpha={alpha}: residual order {order:.2}"));
    }
    Outcome::new(pass, format!("L2 nonincreasing with slack 10 dt^2; {} (need >= 1.8)", parts.join(", ")))
}

fn picard_vs_etd() -> Outcome {
    let u0 = gaussian(256, 16.0 * PI, 0.5);
    let cfg = EvolveConfig::new(2.0, 1e-3, 0.25).unwrap();
    let p = picard_solve(&u0, &cfg).unwrap();
    let e = evolve_etd(&u0, &cfg).unwrap();
    let diff = p.trajectory.last().unwrap().sub(e.last().unwrap()).unwrap().hs_norm(0.0);
    Outcome::new(diff <= 1e-6, format!("H0 difference at T=0.25: {diff:.2e} after {} iterations (tol 1e-6)", p.iterations))
}

fn two_path() -> Outcome {
    let cfg = IterateConfig::new(Variant::SecondLowAlpha, 0.5, 0.0, 0.05, vec![256.0, 512.0]).unwrap();
    let r = two_path_check(&cfg, 256.0, 32, 16).unwrap();
    let rel = r.relative_error();
    Outcome::new(rel <= 1e-4, format!("N=256 relative H^s difference {rel:.2e} (tol 1e-4)"))
}

fn scan(variant: Variant, alpha: f64, s: f64, k0: i32, k1: i32, step: usize) -> InflationScan {
    let schedule: Vec<f64> = (k0..=k1).step_by(step).map(|k| 2f64.powi(k)).collect();
    let cfg = IterateConfig::new(variant, alpha, s, 0.05, schedule).unwrap();
    inflation_scan(&cfg).unwrap()
}

fn slope(s: &InflationScan) -> f64 {
    s.fit.map(|f| f.slope).unwrap_or(f64::NAN)
}

fn inflation() -> Outcome {
    let mut checks: Vec<(String, bool)> = Vec::new();
    let second = slope(&scan(Variant::SecondLowAlpha, 0.5, 0.0, 6, 12, 1));
    checks.push((format!("second_low_alpha a=0.5 s=0: slope {second:.3}, want 0.20 +- 0.10"), second > 0.0 && (second - 0.20).abs() <= 0.10));
    let third = slope(&scan(Variant::ThirdGeneral, 1.5, -0.5, 6, 12, 1));
    checks.push((format!("third_general a=1.5 s=-0.5: slope {third:.3}, want 0.20 +- 0.15"), third > 0.0 && (third - 0.20).abs() <= 0.15));
    let third_sub = slope(&scan(Variant::ThirdGeneral, 1.5, -0.3, 6, 12, 1));
    checks.push((format!("third_general a=1.5 s=-0.3: slope {third_sub:.3}, want < 0"), third_sub < 0.0));
    let a2 = scan(Variant::ThirdAlpha2, 2.0, -0.6, 6, 30, 3);
    let (u, v, w) = (slope(&a2), a2.v3_fit.map(|f| f.slope).unwrap_or(f64::NAN), a2.w3_fit.map(|f| f.slope).unwrap_or(f64::NAN));
    checks.push((format!("third_alpha2 a=2 s=-0.6: slope {u:.3}, want 0.10 +- 0.10"), u > 0.0 && (u - 0.10).abs() <= 0.10));
    checks.push((format!("third_alpha2 v3 slope {v:.3} vs w3 slope {w:.3}, want within 0.05"), (v - w).abs() <= 0.05));
    let heat_lo = slope(&scan(Variant::HeatAppendix, 1.5, -0.2, 6, 12, 1));
    let heat_hi = slope(&scan(Variant::HeatAppendix, 1.5, 0.2, 6, 12, 1));
    checks.push((format!("heat_appendix a=1.5 s=-0.2: slope {heat_lo:.3}, want > 0"), heat_lo > 0.0));
    checks.push((format!("heat_appendix a=1.5 s=+0.2: slope {heat_hi:.3}, want < 0"), heat_hi < 0.0));
    let failed = checks.iter().filter(|c| !c.1).count();
    let mut out = Outcome::new(failed == 0, format!("{} of {} scan checks hold", checks.len() - failed, checks.len()));
    out.notes = checks.into_iter().map(|(m, ok)| format!("{} {m}", if ok { "ok  " } else { "MISS" })).collect();
    out
}

fn dyadic_sweeps() -> Outcome {
    const SPECS: usize = 50;
    let cfg = EstimateConfig { resolution: 64, ..EstimateConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sweep = |regime: Regime| -> Vec<(dbo_lab::dyadic::DyadicBlockSpec, MultiplierEstimate)> {
        let specs: Vec<_> = (0..SPECS).map(|_| sample_spec(regime, 6, &mut rng).unwrap()).collect();
        specs
            .into_par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let est = estimate_block_norm(&spec, &EstimateConfig { seed: i as u64, ..cfg }).unwrap();
                (spec, est)
            })
            .collect()
    };
    let max_ratio = |rows: &[(dbo_lab::dyadic::DyadicBlockSpec, MultiplierEstimate)], gamma: Option<f64>| {
        rows.iter()
            .map(|(spec, est)| match gamma {
                Some(g) => est.lower_bound / spec.bound_rhs(Regime::PmCoherence, g),
                None => est.ratio,
            })
            .fold(0.0, f64::max)
    };
    let high = max_ratio(&sweep(Regime::HighModulation), None);
    let pp = max_ratio(&sweep(Regime::PpCoherence), None);
    let pm_rows = sweep(Regime::PmCoherence);
    let pm: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|&g| max_ratio(&pm_rows, Some(g))).collect();
    let vanish = sweep(Regime::Vanishing);
    let vanish_zero = vanish.iter().all(|(_, e)| e.lower_bound == 0.0);
    let worst = pm.iter().copied().fold(high.max(pp), f64::max);
    Outcome::new(
        worst <= 10.0 && vanish_zero,
        format!(
            "{SPECS} specs per regime; max ratio high {high:.2}, pp {pp:.2}, pm g=1/2/4 {:.2}/{:.2}/{:.2} (ceiling 10); vanishing all zero: {vanish_zero}",
            pm[0], pm[1], pm[2]
        ),
    )
}

fn xnorm_suite() -> Outcome {
    let grid = FourierGrid::new(64, 2.0 * PI).unwrap();
    let window = TimeWindow::new(4.0, 256).unwrap();
    let fields: Vec<SpaceTimeField> = (0..100)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            rng.set_stream(i);
            SpaceTimeField::random_band_limited(window, grid, 8, 64.0, &mut rng).unwrap()
        })
        .collect();
    let plancherel = fields
        .iter()
        .take(10)
        .map(|u| {
            let rhs = 2.0 * PI * u.l2_norm();
            (xbs_norm(u, 0.0, 0.0, 1.5) - rhs).abs() / rhs
        })
        .fold(0.0, f64::max);
    let ratios: Vec<f64> = fields.par_iter().map(|u| xbs_equivalence_check(u, 0.5, 0.0, 1.5).unwrap()).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let phi = SpectralField::from_fn(grid, |x| (-(x - PI).powi(2)).exp());
    let fine = TimeWindow::new(4.0, 4096).unwrap();
    let schedule = [1.0 / 32.0, 1.0 / 16.0, 0.125, 0.25, 0.5, 1.0];
    let nus: Vec<f64> = [0.125, 0.25, 0.5]
        .iter()
        .map(|&theta| contract_factor_check(&phi, theta, &schedule, fine).unwrap().nu())
        .collect();
    Outcome::new(
        plancherel <= 1e-10 && lo >= 1.0 / 3.0 && hi <= 3.0 && nus.iter().all(|&n| n > 0.0),
        format!(
            "Plancherel defect {plancherel:.1e}; equivalence ratios in [{lo:.3}, {hi:.3}]; nu for theta 1/8,1/4,1/2 = {:.3}, {:.3}, {:.3}",
            nus[0], nus[1], nus[2]
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_dbo-lab"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["evolve", "--n", "256", "--L", "50", "--T", "0.1", "--every", "5", "--name", "evolve"],
        &["inflate", "--variant", "heat", "--alpha", "1.5", "--s", "-0.2", "--Nmin", "64", "--Nmax", "1024", "--name", "inflate"],
        &["dyadic", "--regime", "pm", "--samples", "4", "--resolution", "16", "--seed", "7", "--name", "dyadic"],
        &["xnorm", "--check", "equivalence", "--trials", "8", "--seed", "3", "--name", "xnorm"],
        &["picard", "--T", "0.1", "--name", "picard"],
    ];
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut identical = 0;
    for (k, args) in runs.iter().enumerate() {
        let jobs = ["--jobs", if k % 2 == 0 { "1" } else { "2" }];
        let a = args.to_vec();
        let b: Vec<&str> = args.iter().copied().chain(jobs).collect();
        if !(run_cli(dirs[0].path(), &a) && run_cli(dirs[1].path(), &b)) {
            continue;
        }
        let file = format!("{}.csv", args[args.len() - 1]);
        let x = fs::read(dirs[0].path().join(&file)).unwrap();
        let y = fs::read(dirs[1].path().join(&file)).unwrap();
        if x == y {
            identical += 1;
        }
    }
    Outcome::new(identical == runs.len(), format!("{identical} of {} subcommand CSVs byte-identical across reruns", runs.len()))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("resonance identity", Duration::from_secs(5), resonance_identity),
        ("semigroup laws", Duration::from_secs(1), semigroup_laws),
        ("heat smoothing law", Duration::from_secs(30), heat_smoothing),
        ("L2 decay and energy balance", Duration::from_secs(60), l2_decay),
        ("Picard vs ETD", Duration::from_secs(60), picard_vs_etd),
        ("two-path iterate check", Duration::from_secs(120), two_path),
        ("inflation exponents", Duration::from_secs(15 * 60), inflation),
        ("dyadic block sweeps", Duration::from_secs(10 * 60), dyadic_sweeps),
        ("X-norm suite", Duration::from_secs(5 * 60), xnorm_suite),
        ("determinism", Duration::from_secs(5 * 60), determinism),
    ];
    let mut passed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let took = start.elapsed();
        let ok = out.pass && took <= *budget;
        passed += ok as usize;
        println!(
            "{} {:>2} {name}: {} [{:.1}s, budget {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
        for note in &out.notes {
            println!("        {note}");
        }
    }
    println!("{passed}/{} criteria passed", criteria.len());
}
