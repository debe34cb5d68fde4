use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quad::GaussLegendre;
use crate::spectral::{japanese, FourierGrid, SpectralField};

/// Closed frequency interval `[lo, hi]` carrying a constant real amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub amp: f64,
}

/// A piecewise-constant Fourier transform, kept exact rather than sampled.
///
/// All the high-frequency data of the inflation experiments are sums of
/// interval indicators, so the convolution integrals can be split at the
/// interval ends and integrated with smooth rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSpectrum {
    pieces: Vec<Piece>,
}

impl StepSpectrum {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.iter().any(|p| !(p.lo < p.hi) || !p.amp.is_finite()) {
            return Err(LabError::InvalidParameter("pieces need lo < hi and a finite amplitude".into()));
        }
        Ok(Self { pieces })
    }

    pub fn zero() -> Self {
        Self { pieces: Vec::new() }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Value at `xi`, summing every piece whose closed interval contains it.
    pub fn eval(&self, xi: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.lo <= xi && xi <= p.hi)
            .map(|p| p.amp)
            .sum()
    }

    /// Exact `(∫⟨ξ⟩^{2s}|ĥ|² dξ)^{1/2}` for non-overlapping pieces.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let rule = GaussLegendre::new(32);
        let sum: f64 = self
            .pieces
            .iter()
            .map(|p| {
                let panels = ((p.hi - p.lo) / (1.0 + p.lo.abs().min(p.hi.abs()))).ceil().clamp(1.0, 64.0) as usize;
                p.amp * p.amp * rule.composite(p.lo, p.hi, panels, |xi| japanese(xi).powf(2.0 * s))
            })
            .sum();
        sum.sqrt()
    }

    /// Samples on `grid` with half weight on interval ends that fall on grid
    /// frequencies, which makes grid sums the trapezoid rule for the exact
    /// integrals. Each piece must cover at least 8 grid frequencies.
    pub fn sample(&self, grid: FourierGrid) -> Result<SpectralField> {
        let d = grid.d_xi();
        let n = grid.n_modes() as i64;
        let mut field = SpectralField::zeros(grid);
        for p in &self.pieces {
            let points = grid.points_in(p.lo, p.hi);
            if points < 8 {
                return Err(LabError::UnresolvedInterval {
                    width: p.hi - p.lo,
                    points,
                });
            }
            let k_lo = (p.lo / d - 1e-9).ceil() as i64;
            let k_hi = (p.hi / d + 1e-9).floor() as i64;
            if k_lo < -n / 2 || k_hi >= n / 2 {
                return Err(LabError::InvalidParameter(format!(
                    "piece [{}, {}] exceeds the grid band {}",
                    p.lo,
                    p.hi,
                    grid.xi_max()
                )));
            }
            for k in k_lo..=k_hi {
                let xi = k as f64 * d;
                let on_edge = (xi - p.lo).abs() < 1e-9 * d || (xi - p.hi).abs() < 1e-9 * d;
                let w = if on_edge { 0.5 } else { 1.0 };
                let i = grid.index_of(k).expect("checked band");
                field.coeffs_mut()[i] += Complex64::new(w * p.amp, 0.0);
            }
        }
        field.set_real(true);
        Ok(field)
    }

    /// The piecewise-constant function that [`StepSpectrum::sample`] puts on
    /// `grid`, read back as a spectrum constant on each grid cell
    /// `[ξ_k − dξ/2, ξ_k + dξ/2]`.
    pub fn cell_spectrum(&self, grid: FourierGrid) -> Result<StepSpectrum> {
        let d = grid.d_xi();
        let mut cells = Vec::with_capacity(3 * self.pieces.len());
        for p in &self.pieces {
            if grid.points_in(p.lo, p.hi) < 8 {
                return Err(LabError::UnresolvedInterval {
                    width: p.hi - p.lo,
                    points: grid.points_in(p.lo, p.hi),
                });
            }
            let k_lo = (p.lo / d - 1e-9).ceil();
            let k_hi = (p.hi / d + 1e-9).floor();
            let edge = |k: f64, end: f64| if (k * d - end).abs() < 1e-9 * d { 0.5 } else { 1.0 };
            let (a, b) = ((k_lo + 0.5) * d, (k_hi - 0.5) * d);
            cells.push(Piece { lo: a - d, hi: a, amp: edge(k_lo, p.lo) * p.amp });
            cells.push(Piece { lo: a, hi: b, amp: p.amp });
            cells.push(Piece { lo: b, hi: b + d, amp: edge(k_hi, p.hi) * p.amp });
        }
        StepSpectrum::new(cells)
    }

    /// Mirror of every piece onto negative frequencies, with the same amplitude.
    pub(crate) fn with_mirror(pieces: Vec<Piece>) -> Self {
        let mut all = pieces.clone();
        all.extend(pieces.iter().map(|p| Piece {
            lo: -p.hi,
            hi: -p.lo,
            amp: p.amp,
        }));
        Self { pieces: all }
    }
}

/// `Re h_N` for `ĥ_N = γ^{-1/2}χ_{I₁} + γ^{-1/2}N^{-s}χ_{I₂}`,
/// `I₁ = [γ/2, γ]`, `I₂ = [N, N+γ]`.
pub fn hn_low_spectrum(n: f64, gamma: f64, s: f64) -> Result<StepSpectrum> {
    check_scale(n, gamma)?;
    let a = 0.5 * gamma.powf(-0.5);
    Ok(StepSpectrum::with_mirror(vec![
        Piece { lo: 0.5 * gamma, hi: gamma, amp: a },
        Piece { lo: n, hi: n + gamma, amp: a * n.powf(-s) },
    ]))
}

/// `ĥ_N = N^{-s}γ^{-1/2}(χ_{I_N}(ξ) + χ_{I_N}(−ξ))`, `I_N = [N, N+2γ]`.
pub fn hn_sym_spectrum(n: f64, gamma: f64, s: f64) -> Result<StepSpectrum> {
    check_scale(n, gamma)?;
    Ok(StepSpectrum::with_mirror(vec![Piece {
        lo: n,
        hi: n + 2.0 * gamma,
        amp: n.powf(-s) * gamma.powf(-0.5),
    }]))
}

fn check_scale(n: f64, gamma: f64) -> Result<()> {
    if !(n > 0.0 && gamma > 0.0 && gamma.is_finite() && n.is_finite()) {
        return Err(LabError::InvalidParameter(format!("need N > 0 and gamma > 0, got N={n}, gamma={gamma}")));
    }
    Ok(())
}

/// [`hn_low_spectrum`] sampled on `grid`.
pub fn build_hn_low(n: f64, gamma: f64, s: f64, grid: FourierGrid) -> Result<SpectralField> {
    hn_low_spectrum(n, gamma, s)?.sample(grid)
}

/// [`hn_sym_spectrum`] sampled on `grid`.
pub fn build_hn_sym(n: f64, gamma: f64, s: f64, grid: FourierGrid) -> Result<SpectralField> {
    hn_sym_spectrum(n, gamma, s)?.sample(grid)
}
