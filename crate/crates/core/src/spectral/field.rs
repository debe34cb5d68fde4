use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::FourierGrid;
use super::symbols::japanese;
use crate::error::{LabError, Result};
use crate::fft;

/// Regularity indices of a weighted norm: `s` in space, `b` in the time weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex {
    pub s: f64,
    pub b: f64,
}

/// Fourier coefficients of a function on the torus described by `grid`,
/// stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: FourierGrid,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: FourierGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_modes()],
            real: true,
        }
    }

    /// Wraps raw coefficients. When `real` is set, conjugate symmetry is
    /// checked to relative tolerance 1e-12.
    pub fn from_coeffs(grid: FourierGrid, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.n_modes() {
            return Err(LabError::GridMismatch);
        }
        let field = Self { grid, coeffs, real };
        if real && field.symmetry_defect() > 1e-12 {
            return Err(LabError::InvalidParameter(
                "coefficients flagged real are not conjugate symmetric".into(),
            ));
        }
        Ok(field)
    }

    /// Samples `f̂` at every grid frequency.
    pub fn from_spectrum(grid: FourierGrid, f: impl Fn(f64) -> Complex64, real: bool) -> Self {
        let coeffs = grid.frequencies().map(f).collect();
        Self { grid, coeffs, real }
    }

    /// Transforms physical samples `f(x_j)`, `x_j = j·dx`.
    pub fn from_samples(grid: FourierGrid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.n_modes() {
            return Err(LabError::GridMismatch);
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&mut buf);
        let dx = grid.dx();
        buf.iter_mut().for_each(|c| *c *= dx);
        let mut field = Self {
            grid,
            coeffs: buf,
            real: true,
        };
        field.symmetrize();
        Ok(field)
    }

    pub fn from_fn(grid: FourierGrid, f: impl Fn(f64) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.n_modes()).map(|j| f(grid.x(j))).collect();
        Self::from_samples(grid, &samples).expect("sample count matches grid")
    }

    /// `amp·e^{ikdξx}` plus, when `real`, its conjugate partner.
    pub fn single_mode(grid: FourierGrid, k: i64, amp: Complex64, real: bool) -> Result<Self> {
        let i = grid
            .index_of(k)
            .ok_or_else(|| LabError::InvalidParameter(format!("wavenumber {k} not on grid")))?;
        let mut field = Self::zeros(grid);
        field.real = real;
        // coefficient L·amp reproduces amplitude `amp` in physical space
        field.coeffs[i] = amp * grid.period();
        if real {
            if k == 0 {
                field.coeffs[i] = Complex64::new(field.coeffs[i].re, 0.0);
            } else {
                let j = grid.index_of(-k).ok_or_else(|| {
                    LabError::InvalidParameter(format!("wavenumber {} not on grid", -k))
                })?;
                field.coeffs[j] = field.coeffs[i].conj();
            }
        }
        Ok(field)
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn set_real(&mut self, real: bool) {
        self.real = real;
    }

    /// Coefficient at signed wavenumber `k`, zero off the grid.
    pub fn at(&self, k: i64) -> Complex64 {
        self.grid
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Largest `|c(-k) - conj c(k)|` relative to the largest coefficient.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.grid.n_modes() as i64;
        let mut worst = 0.0f64;
        for k in (-n / 2 + 1)..(n / 2) {
            let a = self.at(k);
            let b = self.at(-k);
            worst = worst.max((b - a.conj()).norm());
        }
        worst = worst.max(self.at(-n / 2).im.abs());
        worst / scale
    }

    /// Projects onto conjugate-symmetric coefficients.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n_modes();
        let snapshot = self.coeffs.clone();
        for i in 0..n {
            let k = self.grid.wavenumber(i);
            match self.grid.index_of(-k) {
                Some(j) => self.coeffs[i] = 0.5 * (snapshot[i] + snapshot[j].conj()),
                None => self.coeffs[i] = Complex64::new(snapshot[i].re, 0.0),
            }
        }
        self.real = true;
    }

    /// Physical values `f(x_j)`.
    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        fft::inverse(&mut buf);
        let inv_l = 1.0 / self.grid.period();
        buf.iter_mut().for_each(|v| *v *= inv_l);
        buf
    }

    pub fn to_physical_real(&self) -> Vec<f64> {
        self.to_physical().into_iter().map(|v| v.re).collect()
    }

    /// Riemann sum of `(∫⟨ξ⟩^{2s}|f̂|² dξ)^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.weighted_norm(|xi| japanese(xi).powf(2.0 * s))
    }

    /// `(Σ w(ξ)|f̂(ξ)|² dξ)^{1/2}` for a nonnegative weight `w`.
    pub fn weighted_norm(&self, w: impl Fn(f64) -> f64) -> f64 {
        let sum: f64 = self
            .grid
            .frequencies()
            .zip(&self.coeffs)
            .map(|(xi, c)| w(xi) * c.norm_sqr())
            .sum();
        (sum * self.grid.d_xi()).sqrt()
    }

    /// Squared physical L² norm through Parseval, `(1/2π)Σ|f̂|² dξ`.
    pub fn l2_squared(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        sum * self.grid.d_xi() / (2.0 * std::f64::consts::PI)
    }

    /// Discrete `L^p` norm of the physical samples with cell weight `L/n`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(LabError::InvalidParameter(format!("L^p needs p >= 1, got {p}")));
        }
        let values = self.to_physical();
        Ok(lp_of_samples(&values, self.grid.dx(), p))
    }

    /// Coefficientwise multiplication by `m(ξ)`. The reality flag is kept
    /// only when `keeps_real` is set, i.e. `m(-ξ) = conj m(ξ)`.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> Complex64, keeps_real: bool) -> Self {
        let coeffs = self
            .grid
            .frequencies()
            .zip(&self.coeffs)
            .map(|(xi, c)| m(xi) * c)
            .collect();
        Self {
            grid: self.grid,
            coeffs,
            real: self.real && keeps_real,
        }
    }

    /// `∂_x`, the multiplier `iξ`.
    pub fn derivative_x(&self) -> Self {
        let mut out = self.apply_multiplier(|xi| Complex64::new(0.0, xi), true);
        if out.real {
            // iξ at the Nyquist slot has no conjugate partner on the grid
            if let Some(i) = self.grid.index_of(-(self.grid.n_modes() as i64) / 2) {
                out.coeffs[i] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Fourier coefficients of the pointwise product `f·g`.
    ///
    /// With `dealias`, both factors are zero-padded to twice the mode count,
    /// multiplied exactly and truncated back, so no aliased content reaches
    /// the retained modes.
    pub fn product(&self, other: &Self, dealias: bool) -> Result<Self> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch);
        }
        let n = self.grid.n_modes();
        let m = if dealias { 2 * n } else { n };
        let fa = self.padded_physical(m);
        let fb = other.padded_physical(m);
        let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(a, b)| a * b).collect();
        fft::forward(&mut prod);
        // forward on the padded grid: dx' = L/m
        let scale = self.grid.period() / m as f64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let k = self.grid.wavenumber(i);
            let src = k.rem_euclid(m as i64) as usize;
            *c = prod[src] * scale;
        }
        let mut out = Self {
            grid: self.grid,
            coeffs,
            real: self.real && other.real,
        };
        if out.real {
            out.symmetrize();
        }
        Ok(out)
    }

    fn padded_physical(&self, m: usize) -> Vec<Complex64> {
        let n = self.grid.n_modes();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..n {
            let k = self.grid.wavenumber(i);
            if m > n && k == -(n as i64) / 2 {
                // split the Nyquist mode symmetrically on the padded grid
                let half = self.coeffs[i] * 0.5;
                buf[(m as i64 + k) as usize] += half;
                buf[(-k) as usize] += half;
                continue;
            }
            buf[k.rem_euclid(m as i64) as usize] = self.coeffs[i];
        }
        fft::inverse(&mut buf);
        let inv_l = 1.0 / self.grid.period();
        buf.iter_mut().for_each(|v| *v *= inv_l);
        buf
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            real: self.real,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
            real: self.real && other.real,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

pub(crate) fn lp_of_samples(values: &[Complex64], dx: f64, p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        let sum: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
        (sum * dx).powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> FourierGrid {
        FourierGrid::new(256, 40.0).unwrap()
    }

    #[test]
    fn zero_field_norms() {
        let f = SpectralField::zeros(grid());
        assert_eq!(f.hs_norm(1.3), 0.0);
        assert_eq!(f.lp_norm(2.0).unwrap(), 0.0);
        assert_eq!(f.lp_norm(f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn mean_mode_hs_norm() {
        let g = grid();
        let mut f = SpectralField::zeros(g);
        f.coeffs_mut()[0] = Complex64::new(1.0, 0.0);
        for s in [-2.0, 0.0, 0.7] {
            assert!((f.hs_norm(s) - g.d_xi().sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_sup_norm() {
        let f = SpectralField::from_fn(grid(), |_| 1.0);
        assert!((f.lp_norm(f64::INFINITY).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_l2_matches_closed_form() {
        let g = grid();
        let f = SpectralField::from_fn(g, |x| (-(x - 20.0).powi(2)).exp());
        // ∫ e^{-2x²} dx = sqrt(π/2)
        let exact = (PI / 2.0).sqrt().sqrt();
        assert!((f.lp_norm(2.0).unwrap() - exact).abs() < 1e-8);
        assert!((f.l2_squared().sqrt() - exact).abs() < 1e-8);
    }

    #[test]
    fn rejects_small_p() {
        assert!(SpectralField::zeros(grid()).lp_norm(0.5).is_err());
    }

    #[test]
    fn derivative_of_mode() {
        let g = FourierGrid::new(16, 2.0 * PI).unwrap();
        let f = SpectralField::single_mode(g, 3, Complex64::new(1.0, 0.0), false).unwrap();
        let d = f.derivative_x();
        let phys = d.to_physical();
        for (j, v) in phys.iter().enumerate() {
            let x = g.x(j);
            let expect = Complex64::new(0.0, 3.0) * Complex64::from_polar(1.0, 3.0 * x);
            assert!((v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_keeps_reality() {
        let f = SpectralField::from_fn(grid(), |x| (0.3 * x).sin() + (-(x - 7.0).powi(2)).exp());
        let d = f.derivative_x();
        assert!(d.is_real());
        assert!(d.symmetry_defect() < 1e-12);
        assert!(SpectralField::zeros(grid()).derivative_x().hs_norm(0.0) == 0.0);
    }

    #[test]
    fn dealiased_product_is_exact() {
        let g = FourierGrid::new(16, 2.0 * PI).unwrap();
        let c = SpectralField::from_fn(g, |x| (6.0 * x).cos());
        let sq = c.product(&c, true).unwrap();
        // cos²(6x) = 1/2 + cos(12x)/2 ; mode 12 is beyond the grid
        let phys = sq.to_physical_real();
        for v in phys {
            assert!((v - 0.5).abs() < 1e-12);
        }
        let aliased = c.product(&c, false).unwrap();
        let phys = aliased.to_physical_real();
        assert!(phys.iter().any(|v| (v - 0.5).abs() > 0.1));
    }

    #[test]
    fn reality_check_on_construction() {
        let g = FourierGrid::new(8, 1.0).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 8];
        coeffs[1] = Complex64::new(1.0, 1.0);
        assert!(SpectralField::from_coeffs(g, coeffs.clone(), true).is_err());
        coeffs[7] = Complex64::new(1.0, -1.0);
        assert!(SpectralField::from_coeffs(g, coeffs, true).is_ok());
    }
}
