//! Weighted space-time norms
//!
//! ```text
//! ‖u‖_{X^{b,s}} = ‖⟨i(τ − p(ξ)) + |ξ|^α⟩^b ⟨ξ⟩^s û(τ, ξ)‖_{L²(τ, ξ)}
//! ```
//!
//! A [`SpaceTimeField`] stores the spatial Fourier coefficients at every
//! time of a uniform grid on `[−T_w, T_w)`. The norms never look at `û`
//! directly: the field is first pulled back along the free dispersive flow,
//! `g(t, ξ) = e^{−itp(ξ)} û(t, ξ)`, and only then transformed in time. In
//! the variable `τ' = τ − p(ξ)` the weight becomes `⟨iτ' + |ξ|^α⟩^b⟨ξ⟩^s`,
//! and the time grid only has to resolve the slow profile `g`, not the
//! fast phase `p(ξ)t`.
//!
//! Time transforms follow the spatial convention, `ĝ(τ) = ∫ e^{−itτ} g(t) dt`,
//! so Plancherel reads `Σ|ĝ|² dτ = 2π Σ|g|² dt`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, LabError, Result};
use crate::evolution::CutoffPsi;
use crate::fft;
use crate::fit::{fit_loglog, LineFit};
use crate::spectral::symbols::abs_pow;
use crate::spectral::{dispersion_p, japanese, FourierGrid, SpectralField};

/// Uniform time grid `t_j = −T_w + j·dt`, `j < n_t`, `dt = 2T_w/n_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    half_width: f64,
    n_t: usize,
}

impl TimeWindow {
    pub fn new(half_width: f64, n_t: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(LabError::InvalidParameter(format!("window half-width must be positive, got {half_width}")));
        }
        if n_t < 4 || !n_t.is_power_of_two() {
            return Err(LabError::InvalidParameter(format!("n_t must be a power of two >= 4, got {n_t}")));
        }
        Ok(Self { half_width, n_t })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.half_width / self.n_t as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dt()
    }

    pub fn d_tau(&self) -> f64 {
        2.0 * PI / (2.0 * self.half_width)
    }

    /// Dual frequency of slot `j` in FFT order.
    pub fn tau(&self, j: usize) -> f64 {
        let n = self.n_t as i64;
        let k = if (j as i64) < n / 2 { j as i64 } else { j as i64 - n };
        k as f64 * self.d_tau()
    }
}

impl Default for TimeWindow {
    /// `[−4, 4)` with 256 points.
    fn default() -> Self {
        Self {
            half_width: 4.0,
            n_t: 256,
        }
    }
}

/// Complex coefficients `û(t_j, ξ_i)` on a time window times a Fourier grid.
#[derive(Debug)]
pub struct SpaceTimeField {
    window: TimeWindow,
    grid: FourierGrid,
    values: Vec<Complex64>,
    profile: OnceLock<Vec<Complex64>>,
}

impl Clone for SpaceTimeField {
    fn clone(&self) -> Self {
        Self {
            window: self.window,
            grid: self.grid,
            values: self.values.clone(),
            profile: OnceLock::new(),
        }
    }
}

impl SpaceTimeField {
    /// Wraps a row-major table (time index outer). The first and last time
    /// rows must be below `1e-12` of the largest entry, so that the field is
    /// supported inside the window.
    pub fn new(window: TimeWindow, grid: FourierGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != window.n_t() * grid.n_modes() {
            return Err(LabError::GridMismatch);
        }
        let field = Self {
            window,
            grid,
            values,
            profile: OnceLock::new(),
        };
        let edge = field.edge_ratio();
        if edge >= 1e-12 {
            return Err(LabError::InvalidParameter(format!(
                "field reaches the window boundary (edge/max = {edge:e})"
            )));
        }
        Ok(field)
    }

    pub fn zeros(window: TimeWindow, grid: FourierGrid) -> Self {
        Self {
            window,
            grid,
            values: vec![Complex64::new(0.0, 0.0); window.n_t() * grid.n_modes()],
            profile: OnceLock::new(),
        }
    }

    /// Tabulates `f(t, ξ)`.
    pub fn from_fn(window: TimeWindow, grid: FourierGrid, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let n = grid.n_modes();
        let mut values = Vec::with_capacity(window.n_t() * n);
        for j in 0..window.n_t() {
            let t = window.t(j);
            values.extend((0..n).map(|i| f(t, grid.xi(i))));
        }
        Self::new(window, grid, values)
    }

    /// Stacks spatial slices, one per time of `window`.
    pub fn from_slices(window: TimeWindow, slices: &[SpectralField]) -> Result<Self> {
        let first = slices.first().ok_or(LabError::GridMismatch)?;
        let grid = *first.grid();
        if slices.len() != window.n_t() || slices.iter().any(|f| *f.grid() != grid) {
            return Err(LabError::GridMismatch);
        }
        let values = slices.iter().flat_map(|f| f.coeffs().iter().copied()).collect();
        Self::new(window, grid, values)
    }

    /// `η(t)·φ(x)`.
    pub fn separable(window: TimeWindow, phi: &SpectralField, eta: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = *phi.grid();
        let mut values = Vec::with_capacity(window.n_t() * grid.n_modes());
        for j in 0..window.n_t() {
            let e = eta(window.t(j));
            values.extend(phi.coeffs().iter().map(|c| c * e));
        }
        Self::new(window, grid, values)
    }

    /// `ψ(t)e^{i(kx + p(k)t)}` for the integer wavenumber `k` of `grid`.
    pub fn free_wave(window: TimeWindow, grid: FourierGrid, k: i64) -> Result<Self> {
        let i = grid
            .index_of(k)
            .ok_or_else(|| LabError::InvalidParameter(format!("wavenumber {k} is not on the grid")))?;
        let xi = grid.xi(i);
        let mut field = Self::zeros(window, grid);
        let n = grid.n_modes();
        for j in 0..window.n_t() {
            let t = window.t(j);
            field.values[j * n + i] = Complex64::from_polar(grid.period() * CutoffPsi.eval(t), dispersion_p(xi) * t);
        }
        Ok(field)
    }

    /// `ψ(t)S_α(t)φ`, the truncated linear evolution.
    pub fn free_evolution(window: TimeWindow, phi: &SpectralField, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let grid = *phi.grid();
        let mut values = Vec::with_capacity(window.n_t() * grid.n_modes());
        for j in 0..window.n_t() {
            let t = window.t(j);
            let psi = CutoffPsi.eval(t);
            values.extend(grid.frequencies().zip(phi.coeffs()).map(|(xi, c)| {
                c * Complex64::from_polar(psi * (-abs_pow(xi, alpha) * t.abs()).exp(), dispersion_p(xi) * t)
            }));
        }
        Self::new(window, grid, values)
    }

    /// `ψ(t)Σ a_k e^{i(kx + ω_k t)}` over `|k| ≤ k_max`, with standard complex
    /// Gaussian `a_k` and `ω_k` uniform in `[−omega_max, omega_max]`.
    pub fn random_band_limited<R: Rng>(
        window: TimeWindow,
        grid: FourierGrid,
        k_max: i64,
        omega_max: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let n = grid.n_modes();
        let mut field = Self::zeros(window, grid);
        for k in -k_max..=k_max {
            let i = grid
                .index_of(k)
                .ok_or_else(|| LabError::InvalidParameter(format!("k_max = {k_max} exceeds the grid")))?;
            let a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * grid.period();
            let omega = rng.gen_range(-omega_max..=omega_max);
            for j in 0..window.n_t() {
                let t = window.t(j);
                field.values[j * n + i] = a * Complex64::from_polar(CutoffPsi.eval(t), omega * t);
            }
        }
        Ok(field)
    }

    pub fn window(&self) -> &TimeWindow {
        &self.window
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Spatial coefficients at time index `j`.
    pub fn slice(&self, j: usize) -> SpectralField {
        let n = self.grid.n_modes();
        SpectralField::from_coeffs(self.grid, self.values[j * n..(j + 1) * n].to_vec(), false)
            .expect("row length matches the grid")
    }

    /// Largest boundary entry over the largest entry (0 for the zero field).
    pub fn edge_ratio(&self) -> f64 {
        let n = self.grid.n_modes();
        let max = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let first = self.values[..n].iter();
        let last = self.values[self.values.len() - n..].iter();
        first.chain(last).map(|v| v.norm()).fold(0.0, f64::max) / max
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            window: self.window,
            grid: self.grid,
            values: self.values.iter().map(|v| v * a).collect(),
            profile: OnceLock::new(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.window != other.window || self.grid != other.grid {
            return Err(LabError::GridMismatch);
        }
        Ok(Self {
            window: self.window,
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            profile: OnceLock::new(),
        })
    }

    /// `∂_x(uv)` slice by slice, with dealiased products.
    pub fn derivative_of_product(&self, other: &Self) -> Result<Self> {
        if self.window != other.window || self.grid != other.grid {
            return Err(LabError::GridMismatch);
        }
        let n = self.grid.n_modes();
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.window.n_t() {
            let w = self.slice(j).product(&other.slice(j), true)?.derivative_x();
            values.extend_from_slice(&w.coeffs()[..n]);
        }
        Ok(Self {
            window: self.window,
            grid: self.grid,
            values,
            profile: OnceLock::new(),
        })
    }

    /// `ĝ(τ', ξ)` of the profile `g = e^{−itp(ξ)}û(t, ξ)`, row-major with `τ'`
    /// outer, in FFT order.
    pub fn profile_transform(&self) -> &[Complex64] {
        self.profile.get_or_init(|| {
            let n = self.grid.n_modes();
            let nt = self.window.n_t();
            let dt = self.window.dt();
            let mut out = vec![Complex64::new(0.0, 0.0); n * nt];
            let mut column = vec![Complex64::new(0.0, 0.0); nt];
            for i in 0..n {
                let p = dispersion_p(self.grid.xi(i));
                for (j, c) in column.iter_mut().enumerate() {
                    let t = self.window.t(j);
                    *c = self.values[j * n + i] * Complex64::from_polar(dt, -p * t);
                }
                fft::forward(&mut column);
                // the grid starts at −T_w rather than 0
                for (j, c) in column.iter().enumerate() {
                    let shift = Complex64::from_polar(1.0, self.window.half_width() * self.window.tau(j));
                    out[j * n + i] = c * shift;
                }
            }
            out
        })
    }

    /// `(Σ w(τ', ξ)|ĝ|² dτ dξ)^{1/2}`.
    pub fn profile_norm(&self, w: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.grid.n_modes();
        let g = self.profile_transform();
        let mut sum = 0.0;
        for j in 0..self.window.n_t() {
            let tau = self.window.tau(j);
            for i in 0..n {
                sum += w(tau, self.grid.xi(i)) * g[j * n + i].norm_sqr();
            }
        }
        (sum * self.window.d_tau() * self.grid.d_xi()).sqrt()
    }

    /// Discrete `‖u‖_{L²_{t,x}}`: `(Σ_j dt · (1/2π)Σ_i |û|² dξ)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (sum * self.window.dt() * self.grid.d_xi() / (2.0 * PI)).sqrt()
    }
}

/// `⟨iτ' + |ξ|^α⟩^b ⟨ξ⟩^s`, squared.
fn weight_sq(tau: f64, xi: f64, b: f64, s: f64, alpha: f64) -> f64 {
    let r = abs_pow(xi, alpha);
    (1.0 + tau * tau + r * r).powf(b) * japanese(xi).powf(2.0 * s)
}

/// `‖u‖_{X^{b,s}_α}`, computed on the pulled-back profile.
pub fn xbs_norm(u: &SpaceTimeField, b: f64, s: f64, alpha: f64) -> f64 {
    u.profile_norm(|tau, xi| weight_sq(tau, xi, b, s, alpha))
}

/// Both halves of the split `‖V(−t)u‖_{H^{b,s}} + ‖u‖_{L²_tH^{s+αb}}`, in the
/// Fourier normalisation of [`xbs_norm`].
pub fn xbs_split_norms(u: &SpaceTimeField, b: f64, s: f64, alpha: f64) -> (f64, f64) {
    let profile = u.profile_norm(|tau, xi| japanese(tau).powf(2.0 * b) * japanese(xi).powf(2.0 * s));
    let sobolev = u.profile_norm(|_, xi| japanese(xi).powf(2.0 * (s + alpha * b)));
    (profile, sobolev)
}

/// `‖u‖_{X^{b,s}}` over the sum of the split norms.
pub fn xbs_equivalence_check(u: &SpaceTimeField, b: f64, s: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if b < 0.0 {
        return Err(LabError::InvalidParameter(format!("the split needs b >= 0, got {b}")));
    }
    let (p, q) = xbs_split_norms(u, b, s, alpha);
    if p + q == 0.0 {
        return Err(LabError::Degenerate("zero field".into()));
    }
    Ok(xbs_norm(u, b, s, alpha) / (p + q))
}

/// `‖ψ(t)S_α(t)φ‖_{X^{1/2,s}} / ‖φ‖_{H^s}`.
pub fn linear_free_check(phi: &SpectralField, s: f64, alpha: f64, window: TimeWindow) -> Result<f64> {
    let den = phi.hs_norm(s);
    if den == 0.0 {
        return Err(LabError::Degenerate("zero initial data".into()));
    }
    let u = SpaceTimeField::free_evolution(window, phi, alpha)?;
    Ok(xbs_norm(&u, 0.5, s, alpha) / den)
}

/// Smooth bump supported in `[−1, 1]` with value 1 at the origin.
pub fn unit_bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// Ratios of the contraction probe at each support size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractFit {
    pub theta: f64,
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
    pub fit: LineFit,
}

impl ContractFit {
    /// The fitted exponent `ν` in `ratio ≈ C·T^ν`.
    pub fn nu(&self) -> f64 {
        self.fit.slope
    }
}

/// For `f_T(t, x) = η(t/T)φ(x)` with a fixed bump `η` supported in `[−1, 1]`,
/// measures `‖F⁻¹(f̂_T/⟨τ − p(ξ)⟩^θ)‖ / ‖f_T‖` along `schedule`, and fits
/// the exponent of `T`.
pub fn contract_factor_check(
    phi: &SpectralField,
    theta: f64,
    schedule: &[f64],
    window: TimeWindow,
) -> Result<ContractFit> {
    if !(theta >= 0.0) {
        return Err(LabError::InvalidParameter(format!("theta must be nonnegative, got {theta}")));
    }
    if phi.hs_norm(0.0) == 0.0 {
        return Err(LabError::Degenerate("zero spatial profile".into()));
    }
    let mut times = schedule.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.len() < 2 || times[0] <= 0.0 || times[times.len() - 1] >= window.half_width() {
        return Err(LabError::Degenerate(
            "need at least two distinct support sizes inside the window".into(),
        ));
    }
    if times[0] < 8.0 * window.dt() {
        return Err(LabError::InvalidParameter(format!(
            "smallest support {} is resolved by fewer than 8 time steps",
            times[0]
        )));
    }
    let mut ratios = Vec::with_capacity(times.len());
    for &big_t in &times {
        let f = SpaceTimeField::separable(window, phi, |t| unit_bump(t / big_t))?;
        let num = f.profile_norm(|tau, _| japanese(tau).powf(-2.0 * theta));
        let den = f.profile_norm(|_, _| 1.0);
        ratios.push(num / den);
    }
    let fit = fit_loglog(&times, &ratios)?;
    Ok(ContractFit {
        theta,
        times,
        ratios,
        fit,
    })
}

/// `‖∂_x(uv)‖_{X^{−1/2+δ,s}} / (‖u‖_{X^{1/2,s}}‖v‖_{X^{1/2,s}})`.
pub fn bilinear_ratio_probe(u: &SpaceTimeField, v: &SpaceTimeField, s: f64, alpha: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let den = xbs_norm(u, 0.5, s, alpha) * xbs_norm(v, 0.5, s, alpha);
    if den == 0.0 {
        return Err(LabError::Degenerate("zero factor".into()));
    }
    let w = u.derivative_of_product(v)?;
    Ok(xbs_norm(&w, -0.5 + delta, s, alpha) / den)
}

/// One row of a probe sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub probe: String,
    pub s: f64,
    pub alpha: f64,
    pub b: f64,
    pub delta: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub ratio: f64,
    pub grid_n: usize,
    pub grid_nt: usize,
}
