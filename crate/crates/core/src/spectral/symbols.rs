use num_complex::Complex64;

use crate::error::{check_alpha, Result};

/// Symbol `-i·sgn(ξ)` of the Hilbert transform, with `sgn(0) = 0`.
pub fn hilbert_symbol(xi: f64) -> Complex64 {
    if xi > 0.0 {
        Complex64::new(0.0, -1.0)
    } else if xi < 0.0 {
        Complex64::new(0.0, 1.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Dispersion relation `p(ξ) = ξ|ξ|`.
#[inline]
pub fn dispersion_p(xi: f64) -> f64 {
    xi * xi.abs()
}

/// Symbol `|ξ|^α` of the dissipation. Zero at `ξ = 0` for every α, including α = 0.
pub fn dissipation_symbol(xi: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(abs_pow(xi, alpha))
}

/// `|ξ|^α` with the zero-frequency convention, no range check.
#[inline]
pub(crate) fn abs_pow(xi: f64, alpha: f64) -> f64 {
    if xi == 0.0 {
        0.0
    } else {
        xi.abs().powf(alpha)
    }
}

/// Japanese bracket `⟨x⟩ = (1 + x²)^{1/2}`.
#[inline]
pub fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_values() {
        assert_eq!(hilbert_symbol(2.0), Complex64::new(0.0, -1.0));
        assert_eq!(hilbert_symbol(0.0), Complex64::new(0.0, 0.0));
        assert_eq!(hilbert_symbol(-3.0), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn hilbert_squares_to_minus_one() {
        for xi in [-5.0, -0.1, 1e-9, 3.0] {
            let h = hilbert_symbol(xi);
            assert_eq!(h * h, Complex64::new(-1.0, 0.0));
        }
    }

    #[test]
    fn dispersion_is_odd() {
        assert_eq!(dispersion_p(3.0), 9.0);
        assert_eq!(dispersion_p(-3.0), -9.0);
        assert_eq!(dispersion_p(0.0), 0.0);
    }

    #[test]
    fn dissipation_values() {
        assert_eq!(dissipation_symbol(2.0, 2.0).unwrap(), 4.0);
        assert!((dissipation_symbol(-2.0, 1.5).unwrap() - 2f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(dissipation_symbol(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(dissipation_symbol(0.5, 0.0).unwrap(), 1.0);
        assert!(dissipation_symbol(1.0, 2.5).is_err());
        assert!(dissipation_symbol(1.0, -0.1).is_err());
    }
}
