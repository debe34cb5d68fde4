//! The linear propagator `S_α(t)` and the generalised heat kernel `G_α(t)`.
//!
//! `S_α(t)` is the Fourier multiplier `exp(i t ξ|ξ| − |ξ|^α |t|)`; the heat
//! kernel drops the dispersive phase, `Ĝ_α(t, ξ) = e^{−t|ξ|^α}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, LabError, Result};
use crate::fit::{fit_loglog, LineFit};
use crate::quad::GaussLegendre;
use crate::spectral::{dispersion_p, FourierGrid, SpectralField};
use crate::spectral::symbols::abs_pow;

/// Dissipation exponent `α ∈ [0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    alpha: f64,
}

impl DissipationParams {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// `exp(i t p(ξ) − |ξ|^α |t|)`.
pub fn semigroup_multiplier(xi: f64, t: f64, alpha: f64) -> Complex64 {
    Complex64::from_polar((-abs_pow(xi, alpha) * t.abs()).exp(), t * dispersion_p(xi))
}

/// `S_α(t) f`, for any real `t`.
pub fn apply_semigroup(f: &SpectralField, t: f64, params: DissipationParams) -> SpectralField {
    let alpha = params.alpha;
    f.apply_multiplier(|xi| semigroup_multiplier(xi, t, alpha), true)
}

/// `G_α(t, x) = (1/π) ∫_0^∞ e^{−tξ^α} cos(xξ) dξ`.
///
/// The integral is cut where `e^{−tΞ^α} < 1e−16` and evaluated with composite
/// 16-point Gauss–Legendre on panels no wider than `π/(4|x|+1)`. The first
/// panel is graded towards `ξ = 0`, where `ξ^α` is not smooth.
pub fn heat_kernel_value(t: f64, x: f64, alpha: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LabError::InvalidParameter(format!("heat kernel needs t > 0, got {t}")));
    }
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(LabError::Degenerate("G_0(t) is a multiple of the Dirac mass".into()));
    }
    let cutoff = (37.0 / t).powf(1.0 / alpha);
    let width = PI / (4.0 * x.abs() + 1.0);
    let panels = ((cutoff / width).ceil() as usize).max(64);
    let h = cutoff / panels as f64;
    let rule = GaussLegendre::new(16);
    let f = |xi: f64| (-t * xi.powf(alpha)).exp() * (x * xi).cos();

    let mut sum = 0.0;
    let mut hi = h;
    for _ in 0..40 {
        sum += rule.integrate(0.5 * hi, hi, f);
        hi *= 0.5;
    }
    sum += rule.integrate(0.0, hi, f);
    sum += rule.composite(h, cutoff, panels - 1, f);
    Ok(sum / PI)
}

/// Exponent of `t` in `‖|D|^ρ G_α(t)‖_{L^p} = c·t^{−(1−1/p)/α − ρ/α}`.
pub fn smoothing_exponent(rho: f64, p: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(LabError::Degenerate("smoothing exponent diverges at alpha = 0".into()));
    }
    if !(rho >= 0.0) || !(p >= 1.0) {
        return Err(LabError::InvalidParameter(format!("need rho >= 0 and p >= 1, got rho={rho}, p={p}")));
    }
    Ok(-(1.0 - 1.0 / p) / alpha - rho / alpha)
}

/// Measured power law of `t ↦ ‖|D|^ρ G_α(t)‖_{L^p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingFit {
    pub rho: f64,
    pub p: f64,
    pub alpha: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: LineFit,
    pub predicted: f64,
}

impl SmoothingFit {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }

    /// The constant `c`, read off the intercept.
    pub fn constant(&self) -> f64 {
        self.fit.intercept.exp()
    }
}

/// Rescaled half-length of the torus at the largest time.
const TORUS_SCALE: f64 = 4096.0;

/// Log-log slope of `‖|D|^ρ G_α(t)‖_{L^p}` over `t_schedule`.
///
/// The kernel is synthesised from its symbol on one torus for the whole
/// schedule: long enough that the largest-time profile has decayed at the
/// boundary, fine enough that `t_min ξ_max^α ≥ 37`.
pub fn smoothing_law_check(rho: f64, p: f64, alpha: f64, t_schedule: &[f64]) -> Result<SmoothingFit> {
    Ok(smoothing_law_sweep(rho, &[p], alpha, t_schedule)?.remove(0))
}

/// [`smoothing_law_check`] for several `p` sharing one set of kernels.
pub fn smoothing_law_sweep(rho: f64, ps: &[f64], alpha: f64, t_schedule: &[f64]) -> Result<Vec<SmoothingFit>> {
    let predicted: Vec<f64> = ps
        .iter()
        .map(|&p| smoothing_exponent(rho, p, alpha))
        .collect::<Result<_>>()?;
    check_schedule(t_schedule)?;
    let t_min = t_schedule.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = t_schedule.iter().copied().fold(0.0, f64::max);
    let xi_max = (37.0 / t_min).powf(1.0 / alpha);
    let period = TORUS_SCALE * t_max.powf(1.0 / alpha);
    let grid = FourierGrid::covering(2.0 * PI / period, xi_max)?;

    let mut norms = vec![Vec::with_capacity(t_schedule.len()); ps.len()];
    for &t in t_schedule {
        let field = SpectralField::from_spectrum(
            grid,
            |xi| Complex64::new(abs_pow(xi, rho) * (-t * abs_pow(xi, alpha)).exp(), 0.0),
            true,
        );
        let values = field.to_physical();
        for (k, &p) in ps.iter().enumerate() {
            norms[k].push(crate::spectral::lp_of_samples(&values, grid.dx(), p));
        }
    }
    ps.iter()
        .zip(norms)
        .zip(predicted)
        .map(|((&p, norms), predicted)| {
            Ok(SmoothingFit {
                rho,
                p,
                alpha,
                times: t_schedule.to_vec(),
                fit: fit_loglog(t_schedule, &norms)?,
                norms,
                predicted,
            })
        })
        .collect()
}

fn check_schedule(ts: &[f64]) -> Result<()> {
    if ts.len() < 6 {
        return Err(LabError::Degenerate(format!("schedule needs >= 6 times, got {}", ts.len())));
    }
    if ts.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(LabError::Degenerate("schedule times must be positive".into()));
    }
    let ratio = ts[1] / ts[0];
    let geometric = ts
        .windows(2)
        .all(|w| ((w[1] / w[0]) / ratio - 1.0).abs() < 1e-9);
    if !geometric || (ratio - 1.0).abs() < 1e-9 {
        return Err(LabError::Degenerate("schedule must be geometric with ratio != 1".into()));
    }
    Ok(())
}

/// `{2^{-k} : k = k0, …, k0 + count − 1}`.
pub fn dyadic_times(k0: i32, count: usize) -> Vec<f64> {
    (0..count as i32).map(|k| 2f64.powi(-(k0 + k))).collect()
}
