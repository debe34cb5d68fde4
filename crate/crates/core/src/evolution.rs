//! Nonlinear solvers for `∂_t u + H∂_x²u + |D|^α u + u∂_x u = 0`.
//!
//! Both solvers work with the Duhamel form
//!
//! ```text
//! u(t) = S_α(t)u₀ + ∫₀ᵗ S_α(t − t') N(u(t')) dt',    N(u) = −½ ∂_x(u²)
//! ```
//!
//! [`picard_solve`] iterates the map directly on a uniform time grid;
//! [`evolve_etd`] is a second-order exponential time-differencing stepper.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::semigroup::{apply_semigroup, semigroup_multiplier, DissipationParams};
use crate::spectral::symbols::abs_pow;
use crate::spectral::{dispersion_p, SpectralField};

/// Solver settings shared by [`picard_solve`] and [`evolve_etd`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub params: DissipationParams,
    pub dt: f64,
    pub t_final: f64,
    pub dealias: bool,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    /// Sobolev index of the `sup_t H^s` distance between Picard iterates.
    pub s: f64,
    /// When false the nonlinearity is dropped and both solvers reduce to `S_α(t)u₀`.
    pub nonlinear: bool,
}

impl EvolveConfig {
    pub fn new(alpha: f64, dt: f64, t_final: f64) -> Result<Self> {
        let cfg = Self {
            params: DissipationParams::new(alpha)?,
            dt,
            t_final,
            dealias: true,
            picard_max_iter: 50,
            picard_tol: 1e-10,
            s: 0.0,
            nonlinear: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_final > 0.0 && self.dt < self.t_final) {
            return Err(LabError::InvalidParameter(format!(
                "need 0 < dt < t_final, got dt={}, t_final={}",
                self.dt, self.t_final
            )));
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iter == 0 {
            return Err(LabError::InvalidParameter(
                "picard_tol and picard_max_iter must be positive".into(),
            ));
        }
        DissipationParams::new(self.params.alpha())?;
        Ok(())
    }

    /// Number of steps; `dt` is rounded so that the steps tile `[0, t_final]`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_final / self.steps() as f64
    }
}

/// Smooth cutoff: 1 on `[-1, 1]`, 0 outside `(-2, 2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CutoffPsi;

impl CutoffPsi {
    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 1.0 {
            1.0
        } else if a >= 2.0 {
            0.0
        } else {
            let r = a - 1.0;
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        }
    }

    /// `ψ_T(t) = ψ(t/T)`.
    pub fn scaled(&self, t: f64, big_t: f64) -> f64 {
        self.eval(t / big_t)
    }
}

/// States `u(t_n)` on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&SpectralField> {
        self.states.last()
    }

    /// JSON-ready records of every state.
    pub fn spectra(&self) -> Vec<SpectrumRecord> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, u)| SpectrumRecord {
                t,
                re: u.coeffs().iter().map(|c| c.re).collect(),
                im: u.coeffs().iter().map(|c| c.im).collect(),
            })
            .collect()
    }
}

/// One spectrum dump `{t, re[], im[]}`, coefficients in FFT order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub t: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// `N(u) = −½ ∂_x(u²)`.
pub fn nonlinear_term(u: &SpectralField, dealias: bool) -> Result<SpectralField> {
    let sq = u.product(u, dealias)?;
    let mut out = sq.derivative_x().scale(-0.5);
    if u.is_real() {
        out.symmetrize();
    }
    Ok(out)
}

/// Result of a converged Picard iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardSolution {
    pub trajectory: Trajectory,
    pub iterations: usize,
    /// `sup_t ‖u^{(k)} − u^{(k−1)}‖_{H^s}` per iteration.
    pub history: Vec<f64>,
}

/// Duhamel map on a fixed time grid with cached propagators `S_α(k·dt)`.
struct DuhamelMap {
    cfg: EvolveConfig,
    dt: f64,
    times: Vec<f64>,
    propagators: Vec<Vec<Complex64>>,
    free: Vec<SpectralField>,
}

impl DuhamelMap {
    fn new(u0: &SpectralField, cfg: &EvolveConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.steps();
        let dt = cfg.effective_dt();
        let alpha = cfg.params.alpha();
        let grid = *u0.grid();
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let propagators: Vec<Vec<Complex64>> = times
            .iter()
            .map(|&t| grid.frequencies().map(|xi| semigroup_multiplier(xi, t, alpha)).collect())
            .collect();
        let free = times
            .iter()
            .map(|&t| apply_semigroup(u0, t, cfg.params))
            .collect();
        Ok(Self {
            cfg: *cfg,
            dt,
            times,
            propagators,
            free,
        })
    }

    /// `u ↦ S(t)u₀ + ∫₀ᵗ S(t − t')N(u(t'))dt'` at every grid time.
    fn apply(&self, u: &[SpectralField]) -> Result<Vec<SpectralField>> {
        if !self.cfg.nonlinear {
            return Ok(self.free.clone());
        }
        let sources: Vec<SpectralField> = u
            .iter()
            .map(|v| nonlinear_term(v, self.cfg.dealias))
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(u.len());
        for (n, free) in self.free.iter().enumerate() {
            let mut acc = free.clone();
            let weights = simpson_weights(n, self.dt);
            {
                let coeffs = acc.coeffs_mut();
                for (j, w) in weights.into_iter().enumerate() {
                    let prop = &self.propagators[n - j];
                    for ((c, p), f) in coeffs.iter_mut().zip(prop).zip(sources[j].coeffs()) {
                        *c += w * p * f;
                    }
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    fn trajectory(&self, states: Vec<SpectralField>) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states,
        }
    }
}

/// Composite quadrature weights for `∫₀^{n·h}` on the nodes `0..=n`.
///
/// Simpson for even `n`; for odd `n ≥ 3` the last three intervals use the
/// 3/8 rule; a single interval falls back to the trapezoid.
pub(crate) fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    match n {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let simpson_end = if n.is_multiple_of(2) { n } else { n - 3 };
            let mut k = 0;
            while k < simpson_end {
                w[k] += h / 3.0;
                w[k + 1] += 4.0 * h / 3.0;
                w[k + 2] += h / 3.0;
                k += 2;
            }
            if n % 2 == 1 {
                let b = n - 3;
                w[b] += 3.0 * h / 8.0;
                w[b + 1] += 9.0 * h / 8.0;
                w[b + 2] += 9.0 * h / 8.0;
                w[b + 3] += 3.0 * h / 8.0;
            }
        }
    }
    w
}

fn sup_distance(a: &[SpectralField], b: &[SpectralField], s: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        worst = worst.max(x.sub(y)?.hs_norm(s));
    }
    Ok(worst)
}

/// Picard iteration `u^{(0)} = 0`, `u^{(k+1)} = S(t)u₀ + ∫S(t−t')N(u^{(k)})dt'`.
///
/// Stops once successive iterates are closer than `picard_tol` in the discrete
/// `sup_t H^s` norm. Growth of that distance over three consecutive
/// iterations is reported as [`LabError::Divergence`].
pub fn picard_solve(u0: &SpectralField, cfg: &EvolveConfig) -> Result<PicardSolution> {
    let map = DuhamelMap::new(u0, cfg)?;
    let mut current = vec![SpectralField::zeros(*u0.grid()); map.times.len()];
    let mut history = Vec::new();
    let mut growth = 0;
    for iteration in 1..=cfg.picard_max_iter {
        let next = map.apply(&current)?;
        if next.iter().any(|u| !u.is_finite()) {
            return Err(LabError::Divergence {
                iterations: iteration,
                history,
            });
        }
        let diff = sup_distance(&next, &current, cfg.s)?;
        if let Some(&prev) = history.last() {
            growth = if diff > prev { growth + 1 } else { 0 };
        }
        history.push(diff);
        current = next;
        if diff < cfg.picard_tol {
            return Ok(PicardSolution {
                trajectory: map.trajectory(current),
                iterations: iteration,
                history,
            });
        }
        if growth >= 3 {
            return Err(LabError::Divergence {
                iterations: iteration,
                history,
            });
        }
    }
    Err(LabError::MaxIterations {
        iterations: cfg.picard_max_iter,
        history,
    })
}

/// The first `k` Picard iterates `u^{(1)}, …, u^{(k)}`, without a stopping test.
pub fn picard_iterates(u0: &SpectralField, cfg: &EvolveConfig, k: usize) -> Result<Vec<Trajectory>> {
    let map = DuhamelMap::new(u0, cfg)?;
    let mut current = vec![SpectralField::zeros(*u0.grid()); map.times.len()];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        current = map.apply(&current)?;
        out.push(map.trajectory(current.clone()));
    }
    Ok(out)
}

/// `sup_t ‖u − F(u)‖_{H^s}` for the Duhamel map `F`.
pub fn duhamel_residual(u0: &SpectralField, traj: &Trajectory, cfg: &EvolveConfig) -> Result<f64> {
    let map = DuhamelMap::new(u0, cfg)?;
    if traj.states.len() != map.times.len() {
        return Err(LabError::GridMismatch);
    }
    let image = map.apply(&traj.states)?;
    sup_distance(&image, &traj.states, cfg.s)
}

/// `(e^z − 1)/z` and `(e^z − 1 − z)/z²`, with series near zero.
fn phi12(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        let z3 = z2 * z;
        let phi1 = 1.0 + z / 2.0 + z2 / 6.0 + z3 / 24.0 + z2 * z2 / 120.0;
        let phi2 = 0.5 + z / 6.0 + z2 / 24.0 + z3 / 120.0 + z2 * z2 / 720.0;
        (phi1, phi2)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}

/// Cox–Matthews ETD2RK with the exact linear propagator.
///
/// On a non-finite coefficient the run stops with [`LabError::BlowUp`],
/// carrying the trajectory up to the last finite state.
pub fn evolve_etd(u0: &SpectralField, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.steps();
    let dt = cfg.effective_dt();
    let alpha = cfg.params.alpha();
    let grid = *u0.grid();
    let mut e = Vec::with_capacity(grid.n_modes());
    let mut p1 = Vec::with_capacity(grid.n_modes());
    let mut p2 = Vec::with_capacity(grid.n_modes());
    for xi in grid.frequencies() {
        let c = Complex64::new(-abs_pow(xi, alpha), dispersion_p(xi));
        let (f1, f2) = phi12(c * dt);
        e.push((c * dt).exp());
        p1.push(f1 * dt);
        p2.push(f2 * dt);
    }

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0.clone()],
    };
    let mut u = u0.clone();
    for step in 1..=n {
        let next = if cfg.nonlinear {
            let nu = nonlinear_term(&u, cfg.dealias)?;
            let mut a = u.clone();
            for (i, c) in a.coeffs_mut().iter_mut().enumerate() {
                *c = e[i] * *c + p1[i] * nu.coeffs()[i];
            }
            let na = nonlinear_term(&a, cfg.dealias)?;
            let mut out = a;
            for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
                *c += p2[i] * (na.coeffs()[i] - nu.coeffs()[i]);
            }
            out
        } else {
            let mut out = u.clone();
            for (c, m) in out.coeffs_mut().iter_mut().zip(&e) {
                *c *= m;
            }
            out
        };
        let t = step as f64 * dt;
        if !next.is_finite() {
            return Err(LabError::BlowUp {
                t,
                partial: Box::new(traj),
            });
        }
        u = next;
        traj.times.push(t);
        traj.states.push(u.clone());
    }
    Ok(traj)
}

/// One row of [`l2_decay_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub l2_norm: f64,
    pub hs_norm: f64,
    /// `−2‖|D|^{α/2}u(t)‖²_{L²}`.
    pub dissipation_rate: f64,
    /// `(‖u_{n+1}‖² − ‖u_n‖²)/dt`, absent on the final row.
    pub energy_rate: Option<f64>,
    /// `energy_rate` minus the step-averaged dissipation rate.
    pub balance_residual: Option<f64>,
}

/// Per-step energy diagnostics of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub alpha: f64,
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    /// Largest `‖u_{n+1}‖ − ‖u_n‖ − slack` over the run; nonpositive means
    /// the norm never rose by more than `slack` in one step.
    pub fn max_excess(&self, slack: f64) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].l2_norm - w[0].l2_norm - slack)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.balance_residual)
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// `‖|D|^{α/2}u‖²_{L²} = (1/2π) Σ |ξ|^α |û|² dξ`.
pub fn dissipation_energy(u: &SpectralField, alpha: f64) -> f64 {
    let w = u.weighted_norm(|xi| abs_pow(xi, alpha));
    w * w / (2.0 * PI)
}

/// L² norm, dissipation rate and discrete energy balance along `traj`.
///
/// The balance residual compares the forward difference of `‖u‖²` with the
/// trapezoid average `−(D_n + D_{n+1})` of `−2‖|D|^{α/2}u‖²`, so for a
/// smooth trajectory it vanishes at second order in the step.
pub fn l2_decay_report(traj: &Trajectory, alpha: f64, s: f64) -> Result<DecayReport> {
    DissipationParams::new(alpha)?;
    let energies: Vec<f64> = traj.states.iter().map(|u| u.l2_squared()).collect();
    let diss: Vec<f64> = traj.states.iter().map(|u| dissipation_energy(u, alpha)).collect();
    let rows = (0..traj.len())
        .map(|n| {
            let (energy_rate, balance_residual) = if n + 1 < traj.len() {
                let dt = traj.times[n + 1] - traj.times[n];
                let rate = (energies[n + 1] - energies[n]) / dt;
                (Some(rate), Some(rate + diss[n] + diss[n + 1]))
            } else {
                (None, None)
            };
            DecayRow {
                t: traj.times[n],
                l2_norm: energies[n].sqrt(),
                hs_norm: traj.states[n].hs_norm(s),
                dissipation_rate: -2.0 * diss[n],
                energy_rate,
                balance_residual,
            }
        })
        .collect();
    Ok(DecayReport { alpha, rows })
}
