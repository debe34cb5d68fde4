use std::f64::consts::PI;

use dbo_lab::dyadic::{estimate_block_norm, sample_spec, EstimateConfig, Regime, SweepRow};
use dbo_lab::evolution::{duhamel_residual, evolve_etd, l2_decay_report, picard_solve, EvolveConfig, Trajectory};
use dbo_lab::iterates::{heat_u2_scan, inflation_scan, IterateConfig, ScalingFit, Variant};
use dbo_lab::semigroup::{dyadic_times, smoothing_law_check};
use dbo_lab::spectral::{FourierGrid, SpectralField};
use dbo_lab::xnorm::{
    bilinear_ratio_probe, contract_factor_check, linear_free_check, xbs_equivalence_check, xbs_norm, ProbeRecord,
    SpaceTimeField, TimeWindow,
};
use dbo_lab::LabError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{DyadicArgs, EvolveArgs, HeatArgs, InflateArgs, InitialData, PicardArgs, XnormArgs, XnormCheck};
use crate::error::CliError;
use crate::output::{loglog_script, Output};

fn stem<'a>(name: &'a Option<String>, default: &'a str) -> &'a str {
    name.as_deref().unwrap_or(default)
}

fn initial_data(kind: InitialData, amp: f64, grid: FourierGrid) -> SpectralField {
    let c = grid.period() / 2.0;
    match kind {
        InitialData::Gaussian => SpectralField::from_fn(grid, |x| amp * (-(x - c).powi(2)).exp()),
        InitialData::Sech => SpectralField::from_fn(grid, |x| amp / (x - c).cosh().powi(2)),
        InitialData::Zero => SpectralField::zeros(grid),
    }
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    l2_norm: f64,
    hs_norm: f64,
    dissipation_rate: f64,
}

fn write_trace(out: &Output, traj: &Trajectory, a: &EvolveArgs) -> Result<(), CliError> {
    let report = l2_decay_report(traj, a.alpha, a.s)?;
    let every = a.every.max(1);
    let last = report.rows.len().saturating_sub(1);
    let rows: Vec<TraceRow> = report
        .rows
        .iter()
        .enumerate()
        .filter(|(i, _)| i % every == 0 || *i == last)
        .map(|(_, r)| TraceRow {
            t: r.t,
            l2_norm: r.l2_norm,
            hs_norm: r.hs_norm,
            dissipation_rate: r.dissipation_rate,
        })
        .collect();
    let extra = [format!("max_balance_residual {:e}", report.max_abs_residual())];
    out.csv("csv", &extra, &rows)?;
    if a.spectra {
        let spectra: Vec<_> = traj.spectra().into_iter().step_by(every).collect();
        out.json("json", &serde_json::json!({ "spectra": spectra }))?;
    }
    Ok(())
}

pub fn evolve(a: &EvolveArgs) -> Result<(), CliError> {
    let grid = FourierGrid::new(a.n, a.period)?;
    let mut cfg = EvolveConfig::new(a.alpha, a.dt, a.t_final)?;
    cfg.s = a.s;
    let out = Output::new(&a.common.out, stem(&a.common.name, "evolve"), "evolve", a)?;
    let u0 = initial_data(a.u0, a.amp, grid);
    match evolve_etd(&u0, &cfg) {
        Ok(traj) => write_trace(&out, &traj, a),
        Err(LabError::BlowUp { t, partial }) => {
            write_trace(&out, &partial, a)?;
            Err(CliError::Numerical(format!("blow-up at t = {t}; partial trajectory written")))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct InflateRow {
    variant: &'static str,
    alpha: f64,
    s: f64,
    eps: f64,
    #[serde(rename = "N")]
    n: f64,
    gamma: f64,
    #[serde(rename = "t_N")]
    t_n: f64,
    #[serde(rename = "hN_hs_norm")]
    hn_hs_norm: f64,
    uk_hs_norm: f64,
    v3_norm: Option<f64>,
    w3_norm: Option<f64>,
}

#[derive(Serialize)]
struct InflateSummary {
    variant: &'static str,
    slope: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
    predicted_slope: f64,
    verdict: Option<&'static str>,
    v3_fit: Option<ScalingFit>,
    w3_fit: Option<ScalingFit>,
    aborted: Option<(f64, String)>,
}

pub fn inflate(a: &InflateArgs) -> Result<(), CliError> {
    if !(a.n_min > 0.0 && a.n_max >= a.n_min) || a.step == 0 {
        return Err(CliError::Usage("need 0 < Nmin <= Nmax and step >= 1".into()));
    }
    let (k0, k1) = (a.n_min.log2().round() as i32, a.n_max.log2().round() as i32);
    let schedule: Vec<f64> = (k0..=k1).step_by(a.step as usize).map(|k| 2f64.powi(k)).collect();
    let variant = Variant::parse(&a.variant, a.alpha)?;
    let mut cfg = IterateConfig::new(variant, a.alpha, a.s, a.eps, schedule)?;
    cfg.band_samples = a.band_samples;
    cfg.validate()?;
    let out = Output::new(&a.common.out, stem(&a.common.name, "inflate"), "inflate", a)?;
    let scan = if variant == Variant::HeatAppendix {
        heat_u2_scan(&cfg)?
    } else {
        inflation_scan(&cfg)?
    };
    let rows: Vec<InflateRow> = scan
        .rows
        .iter()
        .map(|r| InflateRow {
            variant: variant.name(),
            alpha: a.alpha,
            s: a.s,
            eps: a.eps,
            n: r.n,
            gamma: r.gamma,
            t_n: r.t_n,
            hn_hs_norm: r.hn_hs_norm,
            uk_hs_norm: r.uk_hs_norm,
            v3_norm: r.v3_norm,
            w3_norm: r.w3_norm,
        })
        .collect();
    out.csv("csv", &[], &rows)?;
    let summary = InflateSummary {
        variant: variant.name(),
        slope: scan.fit.map(|f| f.slope),
        intercept: scan.fit.map(|f| f.intercept),
        r_squared: scan.fit.map(|f| f.r_squared),
        predicted_slope: cfg.predicted_slope(),
        verdict: scan.fit.map(|f| f.verdict().label()),
        v3_fit: scan.v3_fit,
        w3_fit: scan.w3_fit,
        aborted: scan.aborted.clone(),
    };
    out.json("json", &summary)?;
    if let Some(first) = scan.rows.first() {
        let script = loglog_script(
            &out.file_name("csv"),
            5,
            9,
            "N",
            "norm of the iterate",
            (first.n, first.uk_hs_norm),
            cfg.predicted_slope(),
        );
        out.gnuplot(&script)?;
    }
    match scan.aborted {
        Some((n, msg)) => Err(CliError::Numerical(format!("scan aborted at N = {n}: {msg}"))),
        None => Ok(()),
    }
}

pub fn dyadic(a: &DyadicArgs) -> Result<(), CliError> {
    let regime = Regime::parse(&a.regime)?;
    if regime == Regime::Unclassified {
        return Err(CliError::Usage("choose one of high, pp, pm, vanish".into()));
    }
    let out = Output::new(&a.common.out, stem(&a.common.name, "dyadic"), "dyadic", a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let specs = (0..a.samples)
        .map(|_| sample_spec(regime, a.max_n_exp, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let seed = a.seed.wrapping_add(i as u64);
            let cfg = EstimateConfig {
                resolution: a.resolution,
                trials: a.trials,
                rounds: a.rounds,
                seed,
                pm_gamma: a.gamma,
            };
            estimate_block_norm(spec, &cfg).map(|est| SweepRow::new(spec, &est, seed))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    out.csv("csv", &[format!("max_ratio {worst:e}")], &rows)?;
    if worst > a.ceiling {
        return Err(CliError::Numerical(format!("max ratio {worst} exceeds the ceiling {}", a.ceiling)));
    }
    Ok(())
}

#[derive(Serialize)]
struct HeatRow {
    t: f64,
    norm: f64,
}

pub fn heat(a: &HeatArgs) -> Result<(), CliError> {
    if a.count < 2 {
        return Err(CliError::Usage("need at least two times".into()));
    }
    let times = dyadic_times(a.k0, a.count);
    let out = Output::new(&a.common.out, stem(&a.common.name, "heat"), "heat", a)?;
    let fit = smoothing_law_check(a.rho, a.p, a.alpha, &times)?;
    let rows: Vec<HeatRow> = fit.times.iter().zip(&fit.norms).map(|(&t, &norm)| HeatRow { t, norm }).collect();
    out.csv("csv", &[], &rows)?;
    out.json(
        "json",
        &serde_json::json!({
            "slope": fit.slope(),
            "constant": fit.constant(),
            "r_squared": fit.fit.r_squared,
            "predicted_slope": fit.predicted,
        }),
    )?;
    let (t0, n0) = (fit.times[0], fit.norms[0]);
    out.gnuplot(&loglog_script(&out.file_name("csv"), 1, 2, "t", "kernel norm", (t0, n0), fit.predicted))?;
    Ok(())
}

fn probe_row(a: &XnormArgs, probe: &str, b: f64, t: f64, ratio: f64) -> ProbeRecord {
    ProbeRecord {
        probe: probe.into(),
        s: a.s,
        alpha: a.alpha,
        b,
        delta: a.delta,
        t,
        ratio,
        grid_n: a.n,
        grid_nt: a.nt,
    }
}

pub fn xnorm(a: &XnormArgs) -> Result<(), CliError> {
    let window = TimeWindow::new(a.window, a.nt)?;
    let grid = FourierGrid::new(a.n, 2.0 * PI)?;
    let out = Output::new(&a.common.out, stem(&a.common.name, "xnorm"), "xnorm", a)?;
    let omega_max = (a.kmax * a.kmax) as f64;
    let random = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        rng.set_stream(i as u64);
        SpaceTimeField::random_band_limited(window, grid, a.kmax, omega_max, &mut rng)
    };
    let mut failure = None;
    let rows: Vec<ProbeRecord> = match a.check {
        XnormCheck::Plancherel => {
            let ratios = (0..a.trials)
                .into_par_iter()
                .map(|i| {
                    let u = random(i)?;
                    Ok(xbs_norm(&u, 0.0, 0.0, a.alpha) / (2.0 * PI * u.l2_norm()))
                })
                .collect::<Result<Vec<f64>, LabError>>()?;
            let worst = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
            if worst > 1e-10 {
                failure = Some(format!("Plancherel defect {worst:e}"));
            }
            ratios.iter().map(|&r| probe_row(a, "plancherel", 0.0, a.window, r)).collect()
        }
        XnormCheck::Equivalence => {
            let ratios = (0..a.trials)
                .into_par_iter()
                .map(|i| xbs_equivalence_check(&random(i)?, a.b, a.s, a.alpha))
                .collect::<Result<Vec<f64>, LabError>>()?;
            if let Some(r) = ratios.iter().find(|r| !(1.0 / 3.0..=3.0).contains(*r)) {
                failure = Some(format!("equivalence ratio {r} outside [1/3, 3]"));
            }
            ratios.iter().map(|&r| probe_row(a, "equivalence", a.b, a.window, r)).collect()
        }
        XnormCheck::Linear => {
            let phis: Vec<SpectralField> = (1..=a.kmax)
                .map(|k| SpectralField::from_fn(grid, move |x| (-(x - PI).powi(2) * k as f64).exp()))
                .collect();
            let ratios = phis
                .par_iter()
                .map(|phi| linear_free_check(phi, a.s, a.alpha, window))
                .collect::<Result<Vec<f64>, LabError>>()?;
            ratios.iter().map(|&r| probe_row(a, "linear", 0.5, a.window, r)).collect()
        }
        XnormCheck::Contract => {
            let phi = SpectralField::from_fn(grid, |x| (-(x - PI).powi(2)).exp());
            let schedule: Vec<f64> = (0..)
                .map(|k| 2f64.powi(-k))
                .take_while(|&t| t >= 8.0 * window.dt())
                .filter(|&t| t < a.window)
                .collect();
            let fit = contract_factor_check(&phi, a.theta, &schedule, window)?;
            if !(fit.nu() > 0.0) {
                failure = Some(format!("fitted exponent {} is not positive", fit.nu()));
            }
            fit.times
                .iter()
                .zip(&fit.ratios)
                .map(|(&t, &r)| probe_row(a, "contract", -a.theta, t, r))
                .collect()
        }
        XnormCheck::Bilinear => {
            let ratios = (0..a.trials)
                .into_par_iter()
                .map(|i| {
                    let u = random(2 * i)?;
                    let v = random(2 * i + 1)?;
                    bilinear_ratio_probe(&u, &v, a.s, a.alpha, a.delta)
                })
                .collect::<Result<Vec<f64>, LabError>>()?;
            ratios.iter().map(|&r| probe_row(a, "bilinear", -0.5 + a.delta, a.window, r)).collect()
        }
    };
    let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    out.csv("csv", &[format!("ratio_range {min:e} {max:e}")], &rows)?;
    match failure {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct IterationRow {
    iteration: usize,
    increment: f64,
}

pub fn picard(a: &PicardArgs) -> Result<(), CliError> {
    let grid = FourierGrid::new(a.n, a.period)?;
    let mut cfg = EvolveConfig::new(a.alpha, a.dt, a.t_final)?;
    cfg.s = a.s;
    cfg.picard_tol = a.tol;
    cfg.picard_max_iter = a.max_iter;
    cfg.validate()?;
    let out = Output::new(&a.common.out, stem(&a.common.name, "picard"), "picard", a)?;
    let u0 = initial_data(a.u0, a.amp, grid);
    let history_rows = |h: &[f64]| -> Vec<IterationRow> {
        h.iter()
            .enumerate()
            .map(|(i, &increment)| IterationRow { iteration: i + 1, increment })
            .collect()
    };
    let sol = match picard_solve(&u0, &cfg) {
        Ok(sol) => sol,
        Err(e @ (LabError::Divergence { .. } | LabError::MaxIterations { .. })) => {
            if let LabError::Divergence { history, .. } | LabError::MaxIterations { history, .. } = &e {
                out.csv("csv", &[], &history_rows(history))?;
            }
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    out.csv("csv", &[], &history_rows(&sol.history))?;
    let residual = duhamel_residual(&u0, &sol.trajectory, &cfg)?;
    let etd = evolve_etd(&u0, &cfg)?;
    let etd_difference = match (sol.trajectory.last(), etd.last()) {
        (Some(p), Some(e)) => p.sub(e)?.hs_norm(0.0),
        _ => 0.0,
    };
    out.json(
        "json",
        &serde_json::json!({
            "iterations": sol.iterations,
            "residual": residual,
            "tol": a.tol,
            "etd_difference": etd_difference,
        }),
    )?;
    println!("iterations {} residual {residual:e} etd_difference {etd_difference:e}", sol.iterations);
    Ok(())
}
