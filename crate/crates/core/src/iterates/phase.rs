use num_complex::Complex64;

use crate::spectral::dispersion_p;
use crate::spectral::symbols::abs_pow;

/// Linear symbol `L(ξ) = i p(ξ) − |ξ|^α`, optionally without the dispersive part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub alpha: f64,
    pub dispersive: bool,
}

impl Phase {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, dispersive: true }
    }

    /// Pure dissipation, `p ≡ 0`.
    pub fn heat(alpha: f64) -> Self {
        Self { alpha, dispersive: false }
    }

    pub fn linear(&self, xi: f64) -> Complex64 {
        let im = if self.dispersive { dispersion_p(xi) } else { 0.0 };
        Complex64::new(-abs_pow(xi, self.alpha), im)
    }

    /// `χ(ξ, ξ₁) = L(ξ₁) + L(ξ − ξ₁) − L(ξ)`.
    pub fn chi(&self, xi: f64, xi1: f64) -> Complex64 {
        let a = self.alpha;
        let re = -(abs_pow(xi1, a) + abs_pow(xi - xi1, a) - abs_pow(xi, a));
        let im = if self.dispersive {
            dispersion_p(xi1) + dispersion_p(xi - xi1) - dispersion_p(xi)
        } else {
            0.0
        };
        Complex64::new(re, im)
    }

    /// `λ(ξ, ξ₁, ξ₂) = L(ξ₁) + L(ξ₂ − ξ₁) + L(ξ − ξ₂) − L(ξ)`.
    pub fn lambda(&self, xi: f64, xi1: f64, xi2: f64) -> Complex64 {
        let a = self.alpha;
        let re = -(abs_pow(xi1, a) + abs_pow(xi2 - xi1, a) + abs_pow(xi - xi2, a) - abs_pow(xi, a));
        let im = if self.dispersive {
            dispersion_p(xi1) + dispersion_p(xi2 - xi1) + dispersion_p(xi - xi2) - dispersion_p(xi)
        } else {
            0.0
        };
        Complex64::new(re, im)
    }
}

/// `χ(ξ, ξ₁) = i(p(ξ₁) + p(ξ−ξ₁) − p(ξ)) − (|ξ₁|^α + |ξ−ξ₁|^α − |ξ|^α)`.
pub fn chi2(xi: f64, xi1: f64, alpha: f64) -> Complex64 {
    Phase::new(alpha).chi(xi, xi1)
}

/// Three-wave phase `λ(ξ, ξ₁, ξ₂)`.
pub fn lambda3(xi: f64, xi1: f64, xi2: f64, alpha: f64) -> Complex64 {
    Phase::new(alpha).lambda(xi, xi1, xi2)
}

/// `(e^{tz} − 1)/z`, with the series `t(1 + tz/2 + (tz)²/6)` for `|tz| < 1e−4`.
pub fn phi_div(z: Complex64, t: f64) -> Complex64 {
    let w = z * t;
    if w.norm() < 1e-4 {
        t * (1.0 + w / 2.0 + w * w / 6.0)
    } else {
        // e^{x+iy} − 1 without cancellation in the real part
        let (x, y) = (w.re, w.im);
        let half = (0.5 * y).sin();
        let re = x.exp_m1() * y.cos() - 2.0 * half * half;
        let im = x.exp() * y.sin();
        Complex64::new(re, im) / z
    }
}
