use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Uniform frequency lattice of a torus of length `period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierGrid {
    n_modes: usize,
    period: f64,
}

impl FourierGrid {
    pub fn new(n_modes: usize, period: f64) -> Result<Self> {
        if n_modes < 8 || !n_modes.is_power_of_two() {
            return Err(LabError::InvalidParameter(format!(
                "n_modes must be a power of two >= 8, got {n_modes}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Self { n_modes, period })
    }

    /// Smallest power-of-two grid on a torus with spacing `d_xi` whose
    /// Nyquist frequency reaches `xi_max`.
    pub fn covering(d_xi: f64, xi_max: f64) -> Result<Self> {
        if !(d_xi > 0.0 && xi_max > 0.0) {
            return Err(LabError::InvalidParameter(
                "d_xi and xi_max must be positive".into(),
            ));
        }
        let half = (xi_max / d_xi).ceil() as usize;
        let n = (2 * half).next_power_of_two().max(8);
        Self::new(n, 2.0 * PI / d_xi)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn d_xi(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn xi_max(&self) -> f64 {
        self.d_xi() * (self.n_modes / 2) as f64
    }

    /// Physical cell width `L / n`.
    pub fn dx(&self) -> f64 {
        self.period / self.n_modes as f64
    }

    /// Signed wavenumber index of storage slot `i` (FFT ordering).
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n_modes as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage slot of signed wavenumber `k`, if it lies in `[-n/2, n/2)`.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let n = self.n_modes as i64;
        if k >= -n / 2 && k < n / 2 {
            Some(k.rem_euclid(n) as usize)
        } else {
            None
        }
    }

    /// Frequency `k·dξ` stored in slot `i`.
    pub fn xi(&self, i: usize) -> f64 {
        self.wavenumber(i) as f64 * self.d_xi()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_modes).map(move |i| self.xi(i))
    }

    /// Physical sample point `x_j = j·dx`.
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    /// Number of grid frequencies inside the closed interval `[a, b]`.
    pub fn points_in(&self, a: f64, b: f64) -> usize {
        let d = self.d_xi();
        let lo = (a / d).ceil() as i64;
        let hi = (b / d).floor() as i64;
        if hi < lo {
            0
        } else {
            (hi - lo + 1) as usize
        }
    }
}
