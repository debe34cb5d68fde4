use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::phase::{phi_div, Phase};
use super::spectrum::{Piece, StepSpectrum};
use crate::error::{LabError, Result};
use crate::quad::GaussLegendre;

const BASE_POINTS: usize = 32;
const MAX_LEVEL: usize = 4;
const REL_TOL: f64 = 1e-8;

fn rule(level: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    &RULES.get_or_init(|| (0..=MAX_LEVEL).map(|k| GaussLegendre::new(BASE_POINTS << k)).collect())[level]
}

/// Evaluates `integrate(level)` at increasing levels until two consecutive
/// values agree to `REL_TOL` relative to the integral of the modulus.
fn converge<const K: usize>(
    what: &str,
    mut integrate: impl FnMut(&GaussLegendre) -> ([Complex64; K], f64),
) -> Result<[Complex64; K]> {
    let (mut prev, _) = integrate(rule(0));
    for level in 1..=MAX_LEVEL {
        let (next, mass) = integrate(rule(level));
        let scale = mass.max(f64::MIN_POSITIVE);
        if prev.iter().zip(&next).all(|(a, b)| (a - b).norm() <= REL_TOL * scale) {
            return Ok(next);
        }
        prev = next;
    }
    Err(LabError::Quadrature(format!(
        "{what}: no {REL_TOL:e} agreement up to {} points per axis",
        BASE_POINTS << MAX_LEVEL
    )))
}

/// Fourier transform of the quadratic Picard iterate `u₂(t)` at `xi`:
///
/// ```text
/// û₂(t,ξ) = −(iξ/4π) e^{tL(ξ)} ∫ ĥ(ξ₁) ĥ(ξ−ξ₁) (e^{tχ(ξ,ξ₁)} − 1)/χ(ξ,ξ₁) dξ₁
/// ```
pub fn u2_hat(xi: f64, t: f64, phase: Phase, h: &StepSpectrum) -> Result<Complex64> {
    let segments = convolution_segments(xi, h.pieces());
    if segments.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let [integral] = converge("u2_hat", |gl| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for &(lo, hi, amp) in &segments {
            for (x1, w) in gl.mapped(lo, hi) {
                let v = amp * phi_div(phase.chi(xi, x1), t);
                acc += w * v;
                mass += w * v.norm();
            }
        }
        ([acc], mass)
    })?;
    let prefactor = Complex64::new(0.0, -xi / (4.0 * PI)) * (phase.linear(xi) * t).exp();
    Ok(prefactor * integral)
}

/// Intervals in `ξ₁` on which `ĥ(ξ₁)ĥ(ξ−ξ₁)` is a nonzero constant.
fn convolution_segments(xi: f64, pieces: &[Piece]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for a in pieces {
        for b in pieces {
            let lo = a.lo.max(xi - b.hi);
            let hi = a.hi.min(xi - b.lo);
            if hi > lo {
                out.push((lo, hi, a.amp * b.amp));
            }
        }
    }
    out
}

/// The two pieces of the cubic Picard iterate, `û₃ = v̂₃ − ŵ₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicPieces {
    pub v3: Complex64,
    pub w3: Complex64,
}

impl CubicPieces {
    pub fn u3(&self) -> Complex64 {
        self.v3 - self.w3
    }
}

/// Region `{(a, b) : a ∈ P₁, b ∈ P₂, ξ − a − b ∈ P₃}` split into strips in
/// `a` on which the `b`-limits are affine.
struct Strip {
    a_lo: f64,
    a_hi: f64,
    amp: f64,
    /// `b ∈ [lo0 + lo1·a, hi0 + hi1·a]`
    lo: (f64, f64),
    hi: (f64, f64),
}

fn triple_strips(xi: f64, p1: &Piece, p2: &Piece, p3: &Piece) -> Vec<Strip> {
    let mut cuts = vec![
        p1.lo,
        p1.hi,
        xi - p3.hi - p2.lo,
        xi - p3.hi - p2.hi,
        xi - p3.lo - p2.lo,
        xi - p3.lo - p2.hi,
    ];
    cuts.retain(|&c| c >= p1.lo && c <= p1.hi);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite cut"));
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    let amp = p1.amp * p2.amp * p3.amp;
    let mut strips = Vec::new();
    for w in cuts.windows(2) {
        let (a_lo, a_hi) = (w[0], w[1]);
        if a_hi - a_lo <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a_lo + a_hi);
        // b ≥ max(P₂.lo, ξ − a − P₃.hi),  b ≤ min(P₂.hi, ξ − a − P₃.lo)
        let lo = if p2.lo >= xi - mid - p3.hi { (p2.lo, 0.0) } else { (xi - p3.hi, -1.0) };
        let hi = if p2.hi <= xi - mid - p3.lo { (p2.hi, 0.0) } else { (xi - p3.lo, -1.0) };
        if hi.0 + hi.1 * mid > lo.0 + lo.1 * mid {
            strips.push(Strip { a_lo, a_hi, amp, lo, hi });
        }
    }
    strips
}

/// `v̂₃` and `ŵ₃` at `xi`:
///
/// ```text
/// û₃(t,ξ) = −(ξ/8π²) e^{tL(ξ)} ∬ ĥ(ξ₁)ĥ(ξ₂−ξ₁)ĥ(ξ−ξ₂) ξ₂/χ(ξ₂,ξ₁)
///           × [φ(λ(ξ,ξ₁,ξ₂)) − φ(χ(ξ,ξ₂))] dξ₁ dξ₂,     φ(z) = (e^{tz} − 1)/z
/// ```
///
/// integrated in the variables `a = ξ₁`, `b = ξ₂ − ξ₁`.
pub fn u3_hat(xi: f64, t: f64, phase: Phase, h: &StepSpectrum) -> Result<CubicPieces> {
    let pieces = h.pieces();
    let mut strips = Vec::new();
    for p1 in pieces {
        for p2 in pieces {
            for p3 in pieces {
                strips.extend(triple_strips(xi, p1, p2, p3));
            }
        }
    }
    if strips.is_empty() {
        return Ok(CubicPieces {
            v3: Complex64::new(0.0, 0.0),
            w3: Complex64::new(0.0, 0.0),
        });
    }
    let [v, w] = converge("u3_hat", |gl| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut w = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for s in &strips {
            for (a, wa) in gl.mapped(s.a_lo, s.a_hi) {
                let b_lo = s.lo.0 + s.lo.1 * a;
                let b_hi = s.hi.0 + s.hi.1 * a;
                for (b, wb) in gl.mapped(b_lo, b_hi) {
                    let xi1 = a;
                    let xi2 = a + b;
                    let base = s.amp * xi2 / phase.chi(xi2, xi1);
                    let fv = base * phi_div(phase.lambda(xi, xi1, xi2), t);
                    let fw = base * phi_div(phase.chi(xi, xi2), t);
                    let weight = wa * wb;
                    v += weight * fv;
                    w += weight * fw;
                    mass += weight * (fv.norm() + fw.norm());
                }
            }
        }
        ([v, w], mass)
    })?;
    let prefactor = -xi / (8.0 * PI * PI) * (phase.linear(xi) * t).exp();
    Ok(CubicPieces {
        v3: prefactor * v,
        w3: prefactor * w,
    })
}
