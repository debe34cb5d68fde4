//! Explicit high-frequency data and the Fourier transforms of the second and
//! third Picard iterates they generate.
//!
//! For data `h` the Picard expansion `u = Σ_k u_k` starts with
//! `u₁ = S_α(t)h`, `u₂ = ∫₀ᵗ S_α(t−t') N(u₁)`, `u₃ = ∫₀ᵗ S_α(t−t') (−∂_x(u₁u₂))`.
//! A flow map that is `C^k` at the origin forces `‖u_k(t)‖_{H^s} ≲ ‖h‖^k_{H^s}`;
//! the scans below measure how `‖u_k(t_N)‖_{H^s}` grows with the frequency `N`
//! of unit-size data.
//!
//! Convention constants (from `f̂ = ∫e^{−ixξ}f` and `N(u) = −½∂_x(u²)`):
//! `û₂` carries `−iξ/(4π)`, `û₃` carries `−ξ/(8π²)`.

mod phase;
mod quadrature;
mod spectrum;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, LabError, Result};
use crate::evolution::{picard_iterates, EvolveConfig};
use crate::fit::fit_loglog;
use crate::spectral::{japanese, FourierGrid};

pub use phase::{chi2, lambda3, phi_div, Phase};
pub use quadrature::{u2_hat, u3_hat, CubicPieces};
pub use spectrum::{build_hn_low, build_hn_sym, hn_low_spectrum, hn_sym_spectrum, Piece, StepSpectrum};

/// Which inflation mechanism an experiment probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Second iterate, low-high interaction, `0 ≤ α < 1`.
    SecondLowAlpha,
    /// Third iterate, `1 ≤ α < 2`.
    ThirdGeneral,
    /// Third iterate at `α = 2`, where `v₃` and `w₃` are of the same size.
    ThirdAlpha2,
    /// Second iterate without dispersion, high-high interaction, `1 < α ≤ 2`.
    HeatAppendix,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::SecondLowAlpha => "second_low_alpha",
            Variant::ThirdGeneral => "third_general",
            Variant::ThirdAlpha2 => "third_alpha2",
            Variant::HeatAppendix => "heat_appendix",
        }
    }

    /// Accepts the full names and the short forms `second`, `third`, `heat`;
    /// `third` resolves by `alpha`.
    pub fn parse(name: &str, alpha: f64) -> Result<Self> {
        match name {
            "second_low_alpha" | "second" => Ok(Variant::SecondLowAlpha),
            "third_general" => Ok(Variant::ThirdGeneral),
            "third_alpha2" => Ok(Variant::ThirdAlpha2),
            "third" if alpha == 2.0 => Ok(Variant::ThirdAlpha2),
            "third" => Ok(Variant::ThirdGeneral),
            "heat_appendix" | "heat" => Ok(Variant::HeatAppendix),
            other => Err(LabError::InvalidParameter(format!(
                "unknown variant {other:?} (second, third, third_alpha2, heat)"
            ))),
        }
    }

    /// Order `k` of the Picard iterate measured.
    pub fn order(&self) -> usize {
        match self {
            Variant::SecondLowAlpha | Variant::HeatAppendix => 2,
            Variant::ThirdGeneral | Variant::ThirdAlpha2 => 3,
        }
    }
}

/// Parameters of one inflation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateConfig {
    pub variant: Variant,
    pub alpha: f64,
    pub s: f64,
    pub eps: f64,
    pub n_schedule: Vec<f64>,
    /// Equispaced samples across the output band.
    pub band_samples: usize,
}

impl IterateConfig {
    pub fn new(variant: Variant, alpha: f64, s: f64, eps: f64, n_schedule: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            variant,
            alpha,
            s,
            eps,
            n_schedule,
            band_samples: 64,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `{2^{k_min}, …, 2^{k_max}}`.
    pub fn dyadic_schedule(k_min: i32, k_max: i32) -> Vec<f64> {
        (k_min..=k_max).map(|k| 2f64.powi(k)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        let a = self.alpha;
        let ok = match self.variant {
            Variant::SecondLowAlpha => (0.0..=1.0).contains(&a),
            Variant::ThirdGeneral => (1.0..2.0).contains(&a),
            Variant::ThirdAlpha2 => a == 2.0,
            Variant::HeatAppendix => a > 1.0 && a <= 2.0,
        };
        if !ok {
            return Err(LabError::InvalidParameter(format!(
                "alpha = {a} is outside the range of variant {}",
                self.variant.name()
            )));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(LabError::InvalidParameter(format!("eps must lie in (0, 0.5), got {}", self.eps)));
        }
        if !self.s.is_finite() {
            return Err(LabError::InvalidParameter("s must be finite".into()));
        }
        if self.n_schedule.len() < 2 || self.n_schedule.iter().any(|&n| !(n >= 64.0 && n.is_finite())) {
            return Err(LabError::InvalidParameter("N schedule needs >= 2 values, all >= 64".into()));
        }
        if self.band_samples < 2 {
            return Err(LabError::InvalidParameter("band_samples must be >= 2".into()));
        }
        Ok(())
    }

    pub fn gamma(&self, n: f64) -> f64 {
        match self.variant {
            Variant::SecondLowAlpha => n.powf(self.alpha - 1.0),
            Variant::ThirdGeneral => n.powf(self.alpha / 2.0),
            Variant::ThirdAlpha2 => self.eps * n,
            Variant::HeatAppendix => n.powf(1.0 - self.eps),
        }
    }

    pub fn t_n(&self, n: f64) -> f64 {
        let g = self.gamma(n);
        let e = -self.alpha - self.eps;
        match self.variant {
            Variant::SecondLowAlpha => (n + 2.0 * g).powf(e),
            Variant::ThirdGeneral => (n + 4.0 * g).powf(e),
            Variant::ThirdAlpha2 => n.powf(-2.0 - self.eps),
            Variant::HeatAppendix => n.powf(e),
        }
    }

    /// Output frequency band on which `u_k(t_N)` is measured.
    pub fn band(&self, n: f64) -> (f64, f64) {
        let g = self.gamma(n);
        match self.variant {
            Variant::SecondLowAlpha => (n + 0.5 * g, n + 2.0 * g),
            Variant::ThirdGeneral | Variant::ThirdAlpha2 => (n + 3.0 * g, n + 4.0 * g),
            Variant::HeatAppendix => (2.0 * n, 2.0 * n + 4.0 * g),
        }
    }

    pub fn predicted_slope(&self) -> f64 {
        let (a, s, e) = (self.alpha, self.s, self.eps);
        match self.variant {
            Variant::SecondLowAlpha => (1.0 - a) / 2.0 - e,
            Variant::ThirdGeneral => -2.0 * s - a / 2.0 - e,
            Variant::ThirdAlpha2 => -2.0 * s - 1.0 - 2.0 * e,
            Variant::HeatAppendix => -s + 1.5 - a - 1.5 * e,
        }
    }

    pub fn phase(&self) -> Phase {
        match self.variant {
            Variant::HeatAppendix => Phase::heat(self.alpha),
            _ => Phase::new(self.alpha),
        }
    }

    pub fn data(&self, n: f64) -> Result<StepSpectrum> {
        let g = self.gamma(n);
        match self.variant {
            Variant::SecondLowAlpha => hn_low_spectrum(n, g, self.s),
            _ => hn_sym_spectrum(n, g, self.s),
        }
    }
}

/// Verdict attached to a fitted slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "inflation")]
    Inflation,
    #[serde(rename = "no inflation")]
    NoInflation,
    #[serde(rename = "marginal")]
    Marginal,
}

impl Verdict {
    /// Slopes in `[0, 0.02]` are called marginal.
    pub fn from_slope(slope: f64) -> Self {
        if slope > 0.02 {
            Verdict::Inflation
        } else if slope < 0.0 {
            Verdict::NoInflation
        } else {
            Verdict::Marginal
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Inflation => "inflation",
            Verdict::NoInflation => "no inflation",
            Verdict::Marginal => "marginal",
        }
    }
}

/// Log-log fit of a norm against `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_range: (f64, f64),
    pub predicted_slope: f64,
}

impl ScalingFit {
    fn from_rows(ns: &[f64], values: &[f64], predicted_slope: f64) -> Result<Self> {
        let f = fit_loglog(ns, values)?;
        Ok(Self {
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            n_range: (
                ns.iter().copied().fold(f64::INFINITY, f64::min),
                ns.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            predicted_slope,
        })
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::from_slope(self.slope)
    }
}

/// Measurements at one `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: f64,
    pub gamma: f64,
    pub t_n: f64,
    pub hn_hs_norm: f64,
    pub uk_hs_norm: f64,
    pub v3_norm: Option<f64>,
    pub w3_norm: Option<f64>,
}

/// Outcome of [`inflation_scan`]. `aborted` names the first `N` whose
/// quadrature failed; rows and fits cover the values before it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationScan {
    pub variant: Variant,
    pub rows: Vec<ScanRow>,
    pub fit: Option<ScalingFit>,
    pub v3_fit: Option<ScalingFit>,
    pub w3_fit: Option<ScalingFit>,
    pub aborted: Option<(f64, String)>,
}

impl InflationScan {
    pub fn is_complete(&self) -> bool {
        self.aborted.is_none()
    }
}

/// `H^s` norm over `±[lo, hi]` from samples of `|û|` on `[lo, hi]`
/// (trapezoid rule; `û(−ξ) = conj û(ξ)` doubles the one-sided sum).
fn band_norm(lo: f64, hi: f64, s: f64, values: &[f64]) -> f64 {
    let m = values.len();
    let h = (hi - lo) / (m - 1) as f64;
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let w = if j == 0 || j + 1 == m { 0.5 * h } else { h };
            let xi = lo + j as f64 * h;
            w * japanese(xi).powf(2.0 * s) * v * v
        })
        .sum();
    (2.0 * sum).sqrt()
}

/// All measurements for one `N`.
pub fn scan_point(cfg: &IterateConfig, n: f64) -> Result<ScanRow> {
    let h = cfg.data(n)?;
    let t = cfg.t_n(n);
    let (lo, hi) = cfg.band(n);
    let m = cfg.band_samples;
    let phase = cfg.phase();
    let xis: Vec<f64> = (0..m).map(|j| lo + (hi - lo) * j as f64 / (m - 1) as f64).collect();
    let mut row = ScanRow {
        n,
        gamma: cfg.gamma(n),
        t_n: t,
        hn_hs_norm: h.hs_norm(cfg.s),
        uk_hs_norm: 0.0,
        v3_norm: None,
        w3_norm: None,
    };
    match cfg.variant.order() {
        2 => {
            let vals: Vec<f64> = xis
                .par_iter()
                .map(|&xi| u2_hat(xi, t, phase, &h).map(|z| z.norm()))
                .collect::<Result<_>>()?;
            row.uk_hs_norm = band_norm(lo, hi, cfg.s, &vals);
        }
        _ => {
            let vals: Vec<CubicPieces> = xis
                .par_iter()
                .map(|&xi| u3_hat(xi, t, phase, &h))
                .collect::<Result<_>>()?;
            let u: Vec<f64> = vals.iter().map(|c| c.u3().norm()).collect();
            let v: Vec<f64> = vals.iter().map(|c| c.v3.norm()).collect();
            let w: Vec<f64> = vals.iter().map(|c| c.w3.norm()).collect();
            row.uk_hs_norm = band_norm(lo, hi, cfg.s, &u);
            row.v3_norm = Some(band_norm(lo, hi, cfg.s, &v));
            row.w3_norm = Some(band_norm(lo, hi, cfg.s, &w));
        }
    }
    Ok(row)
}

/// `‖u_k(t_N)‖_{H^s}` over the output band for every `N` in the schedule,
/// with a log-log fit against `N`.
pub fn inflation_scan(cfg: &IterateConfig) -> Result<InflationScan> {
    cfg.validate()?;
    let results: Vec<Result<ScanRow>> = cfg.n_schedule.par_iter().map(|&n| scan_point(cfg, n)).collect();
    let mut rows = Vec::new();
    let mut aborted = None;
    for (n, r) in cfg.n_schedule.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                aborted = Some((*n, e.to_string()));
                break;
            }
        }
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n).collect();
    let fit_of = |vals: Option<Vec<f64>>| -> Option<ScalingFit> {
        let vals = vals?;
        if vals.len() < 2 {
            return None;
        }
        ScalingFit::from_rows(&ns, &vals, cfg.predicted_slope()).ok()
    };
    let uk: Vec<f64> = rows.iter().map(|r| r.uk_hs_norm).collect();
    let v3: Option<Vec<f64>> = rows.iter().map(|r| r.v3_norm).collect();
    let w3: Option<Vec<f64>> = rows.iter().map(|r| r.w3_norm).collect();
    Ok(InflationScan {
        variant: cfg.variant,
        fit: fit_of(Some(uk)),
        v3_fit: fit_of(v3),
        w3_fit: fit_of(w3),
        rows,
        aborted,
    })
}

/// [`inflation_scan`] restricted to the dispersionless variant.
pub fn heat_u2_scan(cfg: &IterateConfig) -> Result<InflationScan> {
    if cfg.variant != Variant::HeatAppendix {
        return Err(LabError::InvalidParameter("heat_u2_scan needs the heat_appendix variant".into()));
    }
    inflation_scan(cfg)
}

/// Outcome of [`two_path_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPathReport {
    pub n: f64,
    pub gamma: f64,
    pub t_n: f64,
    pub grid_modes: usize,
    pub time_steps: usize,
    /// `H^s` norm over the band of the quadrature values.
    pub quadrature_norm: f64,
    /// `H^s` norm over the band of the difference of the two paths.
    pub difference_norm: f64,
}

impl TwoPathReport {
    pub fn relative_error(&self) -> f64 {
        self.difference_norm / self.quadrature_norm
    }
}

/// Computes `u₂(t_N)` for the low-high data twice: by frequency quadrature,
/// and as `u^{(2)} − u^{(1)}` from two Picard iterations on a grid whose
/// spacing is `γ/points_per_gamma`. Compares them at the grid frequencies
/// of the output band.
pub fn two_path_check(cfg: &IterateConfig, n: f64, points_per_gamma: usize, time_steps: usize) -> Result<TwoPathReport> {
    if cfg.variant != Variant::SecondLowAlpha {
        return Err(LabError::InvalidParameter("two-path check uses the second_low_alpha data".into()));
    }
    let gamma = cfg.gamma(n);
    let t = cfg.t_n(n);
    let (lo, hi) = cfg.band(n);
    let grid = FourierGrid::covering(gamma / points_per_gamma as f64, hi)?;
    let h = cfg.data(n)?;
    let h_grid = h.sample(grid)?;

    let mut evolve = EvolveConfig::new(cfg.alpha, t / time_steps as f64, t)?;
    evolve.s = cfg.s;
    let iterates = picard_iterates(&h_grid, &evolve, 2)?;
    let u1 = iterates[0].last().expect("nonempty trajectory");
    let u2 = iterates[1].last().expect("nonempty trajectory");

    let cells = h.cell_spectrum(grid)?;
    let phase = cfg.phase();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..grid.n_modes() {
        let xi = grid.xi(i);
        if xi < lo - 1e-12 || xi > hi + 1e-12 {
            continue;
        }
        let picard = u2.coeffs()[i] - u1.coeffs()[i];
        let quad = u2_hat(xi, t, phase, &cells)?;
        let w = japanese(xi).powf(2.0 * cfg.s) * grid.d_xi();
        num += w * (picard - quad).norm_sqr();
        den += w * quad.norm_sqr();
    }
    Ok(TwoPathReport {
        n,
        gamma,
        t_n: t,
        grid_modes: grid.n_modes(),
        time_steps: evolve.steps(),
        quadrature_norm: den.sqrt(),
        difference_norm: num.sqrt(),
    })
}
