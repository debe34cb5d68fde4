//! Resonance function and dyadic multiplier blocks
//!
//! On the hyperplane `ξ₁ + ξ₂ + ξ₃ = 0` the resonance function
//! `h(ξ) = Σ ξ_j|ξ_j|` factors exactly: if `ξ_a, ξ_b` are the two entries of
//! equal sign, then `|h| = 2|ξ_a ξ_b|`, so `N_min N_max ≤ |h| ≤ 2 N_min N_max`.
//!
//! A block restricts the trilinear form
//!
//! ```text
//! ∫_{ζ₁+ζ₂+ζ₃=0} m(ζ) f₁(ζ₁) f₂(ζ₂) f₃(ζ₃),     ζ_j = (τ_j, ξ_j)
//! ```
//!
//! to `|ξ_j| ∈ [N_j, 2N_j)`, `|λ_j| ∈ [L_j, 2L_j)` with `λ_j = τ_j − ξ_j|ξ_j|`,
//! and `|h| ∈ [H, 2H)`. [`estimate_block_norm`] maximises the form over
//! unit-norm test functions that are constant on the cells of a
//! `(ξ, λ)` lattice, which bounds the multiplier norm from below.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::dispersion_p;

/// Three frequencies summing to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTriple {
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
}

impl FrequencyTriple {
    /// Checks `|ξ₁ + ξ₂ + ξ₃| ≤ 1e-12·max(1, N_max)`.
    pub fn new(xi1: f64, xi2: f64, xi3: f64) -> Result<Self> {
        let t = Self { xi1, xi2, xi3 };
        if !(xi1.is_finite() && xi2.is_finite() && xi3.is_finite()) {
            return Err(LabError::InvalidParameter("frequencies must be finite".into()));
        }
        let scale = t.sorted_magnitudes()[2].max(1.0);
        if (xi1 + xi2 + xi3).abs() > 1e-12 * scale {
            return Err(LabError::InvalidParameter(format!(
                "frequencies do not sum to zero: {xi1} + {xi2} + {xi3}"
            )));
        }
        Ok(t)
    }

    /// `(ξ₁, ξ₂, −ξ₁−ξ₂)`.
    pub fn from_pair(xi1: f64, xi2: f64) -> Self {
        Self {
            xi1,
            xi2,
            xi3: -(xi1 + xi2),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.xi1, self.xi2, self.xi3]
    }

    /// `[N_min, N_med, N_max]`.
    pub fn sorted_magnitudes(&self) -> [f64; 3] {
        let mut m = self.as_array().map(f64::abs);
        m.sort_by(f64::total_cmp);
        m
    }

    /// The two entries other than the one of largest magnitude. They carry
    /// the same sign (or one of them vanishes).
    pub fn same_sign_pair(&self) -> (f64, f64) {
        let v = self.as_array();
        let big = (0..3).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
        let rest: Vec<f64> = (0..3).filter(|&j| j != big).map(|j| v[j]).collect();
        (rest[0], rest[1])
    }
}

/// `h(ξ) = ξ₁|ξ₁| + ξ₂|ξ₂| + ξ₃|ξ₃|`.
///
/// The squares cancel to `O(N_min N_max)`, so each product is split exactly
/// with `fma` and the six parts are summed with compensation. The result is
/// accurate relative to `|h|` rather than to `N_max²`.
pub fn resonance(t: &FrequencyTriple) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in t.as_array() {
        let p = dispersion_p(x);
        for part in [p, x.mul_add(x.abs(), -p)] {
            let s = sum + part;
            carry += if sum.abs() >= part.abs() { (sum - s) + part } else { (part - s) + sum };
            sum = s;
        }
    }
    sum + carry
}

/// Checks `|h| = 2|ξ_a ξ_b|` and `N_min N_max ≤ |h| ≤ 2 N_min N_max`, up to
/// `1e-12·N_max²`, the slack allowed in the sum of the triple.
pub fn resonance_identity_check(t: &FrequencyTriple) -> bool {
    let h = resonance(t).abs();
    let (a, b) = t.same_sign_pair();
    let product = 2.0 * (a * b).abs();
    let [n_min, _, n_max] = t.sorted_magnitudes();
    let tol = 1e-12 * n_max * n_max;
    let exact = (h - product).abs() <= tol;
    let lower = n_min * n_max <= h + tol;
    let upper = h <= 2.0 * n_min * n_max + tol;
    exact && lower && upper && a * b >= 0.0
}

/// Case of a block, which fixes the bound that applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    HighModulation,
    PpCoherence,
    PmCoherence,
    /// The support is provably empty.
    Vanishing,
    /// Support conditions hold but none of the stated cases applies.
    Unclassified,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::HighModulation => "high_modulation",
            Regime::PpCoherence => "pp_coherence",
            Regime::PmCoherence => "pm_coherence",
            Regime::Vanishing => "vanishing",
            Regime::Unclassified => "unclassified",
        }
    }

    /// Accepts the labels and the short names `high`, `pp`, `pm`, `vanish`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "high" | "high_modulation" => Ok(Regime::HighModulation),
            "pp" | "pp_coherence" => Ok(Regime::PpCoherence),
            "pm" | "pm_coherence" => Ok(Regime::PmCoherence),
            "vanish" | "vanishing" => Ok(Regime::Vanishing),
            other => Err(LabError::InvalidParameter(format!(
                "unknown regime '{other}' (expected high, pp, pm or vanish)"
            ))),
        }
    }
}

/// Dyadic sizes `(N₁, N₂, N₃, H, L₁, L₂, L₃)` of one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicBlockSpec {
    pub n: [f64; 3],
    pub h: f64,
    pub l: [f64; 3],
}

fn is_dyadic(x: f64) -> bool {
    x > 0.0 && x.is_finite() && x.log2().fract() == 0.0
}

/// `a ∼ b` within `factor`.
fn comparable(a: f64, b: f64, factor: f64) -> bool {
    a.max(b) <= factor * a.min(b)
}

fn sorted(v: [f64; 3]) -> [f64; 3] {
    let mut s = v;
    s.sort_by(f64::total_cmp);
    s
}

impl DyadicBlockSpec {
    /// Every size must be a power of two.
    pub fn new(n: [f64; 3], h: f64, l: [f64; 3]) -> Result<Self> {
        if !n.iter().chain(&l).chain(std::iter::once(&h)).all(|&x| is_dyadic(x)) {
            return Err(LabError::InvalidParameter(format!(
                "block sizes must be powers of two: N={n:?} H={h} L={l:?}"
            )));
        }
        Ok(Self { n, h, l })
    }

    /// Necessary conditions for a nonempty support: `N_max ∼ N_med`,
    /// `H ∼ N_max N_min` within 4 and `L_max ∼ max(H, L_med)` within 4.
    /// The factors are the ones under which the cell bounds of the
    /// hyperplane identities are strict for dyadic sizes.
    pub fn support_conditions(&self) -> bool {
        let [n_min, n_med, n_max] = sorted(self.n);
        let [_, l_med, l_max] = sorted(self.l);
        comparable(n_max, n_med, 2.0)
            && comparable(self.h, n_max * n_min, 4.0)
            && comparable(l_max, self.h.max(l_med), 4.0)
    }

    /// Right-hand side of the block estimate for `regime`; zero for the
    /// vanishing and unclassified cases. `gamma` enters only the `(+−)` case.
    pub fn bound_rhs(&self, regime: Regime, gamma: f64) -> f64 {
        let [n_min, _, n_max] = sorted(self.n);
        let [l_min, l_med, _] = sorted(self.l);
        match regime {
            Regime::HighModulation => (l_min * n_min).sqrt(),
            Regime::PpCoherence => l_min.sqrt() * l_med.powf(0.25),
            Regime::PmCoherence => {
                let e = 0.5 / gamma;
                let interp = n_max.powf(0.5 - e) * n_min.powf(-e) * l_med.powf(e);
                l_min.sqrt() * n_min.sqrt().min(interp)
            }
            Regime::Vanishing | Regime::Unclassified => 0.0,
        }
    }
}

/// Case split with `∼` read as factor 2 and `≫` as factor 8.
pub fn regime_classify(spec: &DyadicBlockSpec) -> Regime {
    if !spec.support_conditions() {
        return Regime::Vanishing;
    }
    let [n_min, _, n_max] = sorted(spec.n);
    let [_, l_med, l_max] = sorted(spec.l);
    if comparable(l_max, l_med, 2.0) && l_med >= 8.0 * spec.h {
        return Regime::HighModulation;
    }
    if !comparable(l_max, spec.h, 2.0) {
        return Regime::Unclassified;
    }
    if comparable(n_max, n_min, 2.0) {
        return Regime::PpCoherence;
    }
    for j in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&k| k != j).collect();
        let (a, b) = (others[0], others[1]);
        let separated = spec.n[a].min(spec.n[b]) >= 8.0 * spec.n[j];
        let dominant = spec.l[j] >= spec.l[a] && spec.l[j] >= spec.l[b];
        if separated && comparable(spec.n[a], spec.n[b], 2.0) && comparable(spec.h, spec.l[j], 2.0) && dominant {
            return Regime::PmCoherence;
        }
    }
    Regime::Unclassified
}

/// `χ_{|h|∼H} Π χ_{|ξ_j|∼N_j} χ_{|λ_j|∼L_j}` at one point of the hyperplane.
pub fn block_indicator(spec: &DyadicBlockSpec, tau: [f64; 3], xi: [f64; 3]) -> Result<bool> {
    let scale = xi.iter().map(|x| x.abs()).fold(1.0, f64::max);
    if (xi[0] + xi[1] + xi[2]).abs() > 1e-12 * scale {
        return Err(LabError::InvalidParameter("frequencies do not sum to zero".into()));
    }
    let tscale = tau.iter().map(|x| x.abs()).fold(1.0, f64::max);
    if (tau[0] + tau[1] + tau[2]).abs() > 1e-12 * tscale {
        return Err(LabError::InvalidParameter("modulation variables do not sum to zero".into()));
    }
    let within = |x: f64, size: f64| size <= x.abs() && x.abs() < 2.0 * size;
    let h = xi.iter().map(|&x| dispersion_p(x)).sum::<f64>();
    Ok(within(h, spec.h)
        && (0..3).all(|j| within(xi[j], spec.n[j]) && within(tau[j] - dispersion_p(xi[j]), spec.l[j])))
}

/// Lattice and optimiser settings for [`estimate_block_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    /// Cells per axis of each window, split evenly between the two signs.
    pub resolution: usize,
    pub trials: usize,
    pub rounds: usize,
    pub seed: u64,
    /// Interpolation parameter of the `(+−)` bound.
    pub pm_gamma: f64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            resolution: 64,
            trials: 16,
            rounds: 20,
            seed: 0,
            pm_gamma: 1.0,
        }
    }
}

/// Best trilinear value found for one block, against the matching bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierEstimate {
    pub regime: Regime,
    pub lower_bound: f64,
    pub bound_rhs: f64,
    /// `lower_bound / bound_rhs`; 0 when both vanish and infinite when only
    /// the bound does.
    pub ratio: f64,
    pub trials: usize,
    pub resolution: usize,
    pub active_cells: usize,
}

/// Cell lattice of one leg: `res/2` magnitude cells per sign in `ξ` and in `λ`.
struct Leg {
    n: f64,
    l: f64,
    half: usize,
}

impl Leg {
    fn centre(size: f64, half: usize, i: usize) -> f64 {
        let width = size / half as f64;
        let (sign, k) = if i < half { (-1.0, half - 1 - i) } else { (1.0, i - half) };
        sign * (size + (k as f64 + 0.5) * width)
    }

    fn index(size: f64, half: usize, x: f64) -> Option<usize> {
        let a = x.abs();
        if !(size <= a && a < 2.0 * size) {
            return None;
        }
        let k = (((a - size) / size) * half as f64).floor() as usize;
        let k = k.min(half - 1);
        Some(if x < 0.0 { half - 1 - k } else { half + k })
    }

    fn cell_area(&self) -> f64 {
        (self.n / self.half as f64) * (self.l / self.half as f64)
    }

    fn cells(&self) -> usize {
        4 * self.half * self.half
    }
}

/// Nonzero entries `(i_a, i_b, i_c)` of the discretised form; leg `c` is the
/// one whose `(ξ, λ)` follows from the other two.
fn active_entries(spec: &DyadicBlockSpec, legs: &[Leg; 3]) -> Vec<[u32; 3]> {
    let [a, b, c] = legs;
    let side = 2 * a.half;
    let mut out = Vec::new();
    for ia_xi in 0..side {
        let xa = Leg::centre(a.n, a.half, ia_xi);
        for ib_xi in 0..side {
            let xb = Leg::centre(b.n, b.half, ib_xi);
            let xc = -(xa + xb);
            let Some(ic_xi) = Leg::index(c.n, c.half, xc) else {
                continue;
            };
            let h = dispersion_p(xa) + dispersion_p(xb) + dispersion_p(xc);
            if !(spec.h <= h.abs() && h.abs() < 2.0 * spec.h) {
                continue;
            }
            for ia_l in 0..side {
                let la = Leg::centre(a.l, a.half, ia_l);
                for ib_l in 0..side {
                    let lb = Leg::centre(b.l, b.half, ib_l);
                    let lc = -(la + lb + h);
                    if let Some(ic_l) = Leg::index(c.l, c.half, lc) {
                        out.push([
                            (ia_xi * side + ia_l) as u32,
                            (ib_xi * side + ib_l) as u32,
                            (ic_xi * side + ic_l) as u32,
                        ]);
                    }
                }
            }
        }
    }
    out
}

fn normalise(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Alternating maximisation of `Σ a[i_a] b[i_b] c[i_c]` over unit vectors.
fn maximise(entries: &[[u32; 3]], sizes: [usize; 3], rounds: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut v: [Vec<f64>; 3] = sizes.map(|n| (0..n).map(|_| rng.gen::<f64>()).collect());
    v.iter_mut().for_each(|x| {
        normalise(x);
    });
    let mut best = 0.0;
    for _ in 0..rounds {
        let mut value = 0.0;
        for leg in 0..3 {
            let (p, q) = ((leg + 1) % 3, (leg + 2) % 3);
            let mut grad = vec![0.0; sizes[leg]];
            for e in entries {
                grad[e[leg] as usize] += v[p][e[p] as usize] * v[q][e[q] as usize];
            }
            value = normalise(&mut grad);
            v[leg] = grad;
        }
        let done = value <= best * (1.0 + 1e-12);
        best = f64::max(best, value);
        if done {
            break;
        }
    }
    best
}

/// Lower bound for the multiplier norm of one block.
///
/// Legs 1 and 2 of the form are sampled at cell centres; the leg with the
/// largest modulation size is the derived one, so that its cells are at
/// least as wide as the spread of `λ` across a pair of input cells. Trial
/// `k` draws its start from the ChaCha stream `k` of `seed`.
pub fn estimate_block_norm(spec: &DyadicBlockSpec, cfg: &EstimateConfig) -> Result<MultiplierEstimate> {
    if cfg.resolution < 4 || !cfg.resolution.is_multiple_of(2) {
        return Err(LabError::InvalidParameter(format!(
            "resolution must be even and >= 4, got {}",
            cfg.resolution
        )));
    }
    if cfg.trials == 0 || cfg.rounds == 0 {
        return Err(LabError::InvalidParameter("need at least one trial and one round".into()));
    }
    if !(cfg.pm_gamma > 0.0) {
        return Err(LabError::InvalidParameter(format!("gamma must be positive, got {}", cfg.pm_gamma)));
    }
    let regime = regime_classify(spec);
    let bound_rhs = spec.bound_rhs(regime, cfg.pm_gamma);
    let c = (0..3).max_by(|&x, &y| spec.l[x].total_cmp(&spec.l[y])).unwrap_or(2);
    let order = [(c + 1) % 3, (c + 2) % 3, c];
    let half = cfg.resolution / 2;
    let legs = order.map(|j| Leg {
        n: spec.n[j],
        l: spec.l[j],
        half,
    });
    let entries = active_entries(spec, &legs);
    let lower_bound = if entries.is_empty() {
        0.0
    } else {
        let weight = (legs[0].cell_area() * legs[1].cell_area() / legs[2].cell_area()).sqrt();
        let sizes = [legs[0].cells(), legs[1].cells(), legs[2].cells()];
        let best = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(trial as u64);
                maximise(&entries, sizes, cfg.rounds, &mut rng)
            })
            .reduce(|| 0.0, f64::max);
        weight * best
    };
    let ratio = if lower_bound == 0.0 {
        0.0
    } else if bound_rhs > 0.0 {
        lower_bound / bound_rhs
    } else {
        f64::INFINITY
    };
    Ok(MultiplierEstimate {
        regime,
        lower_bound,
        bound_rhs,
        ratio,
        trials: cfg.trials,
        resolution: cfg.resolution,
        active_cells: entries.len(),
    })
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Draws a random block of the requested regime. Frequencies stay below
/// `2^max_n_exp`; vanishing blocks break one support condition by at least
/// a factor 8.
pub fn sample_spec<R: Rng>(regime: Regime, max_n_exp: i32, rng: &mut R) -> Result<DyadicBlockSpec> {
    if max_n_exp < 4 {
        return Err(LabError::InvalidParameter("need max_n_exp >= 4".into()));
    }
    if regime == Regime::Unclassified {
        return Err(LabError::InvalidParameter("no sampler for unclassified blocks".into()));
    }
    for _ in 0..10_000 {
        let spec = draw(regime, max_n_exp, rng)?;
        if regime_classify(&spec) == regime {
            return Ok(spec);
        }
    }
    Err(LabError::Degenerate(format!("could not draw a {} block", regime.label())))
}

fn draw<R: Rng>(regime: Regime, max_n_exp: i32, rng: &mut R) -> Result<DyadicBlockSpec> {
    // N_min = 2^i, N_med = N_max = 2^j; the small leg sits at a random slot
    let (i, j) = match regime {
        Regime::PpCoherence => {
            let i = rng.gen_range(1..max_n_exp);
            (i, i + 1)
        }
        Regime::PmCoherence => {
            let j = rng.gen_range(4..=max_n_exp);
            (rng.gen_range(0..=j - 3), j)
        }
        _ => {
            let j = rng.gen_range(2..=max_n_exp);
            (rng.gen_range(0..j), j)
        }
    };
    let small = rng.gen_range(0..3);
    let mut n = [pow2(j); 3];
    n[small] = pow2(i);
    let h_exp = i + j + rng.gen_range(1..=2);
    let h = pow2(h_exp);
    let mut l = [1.0; 3];
    match regime {
        Regime::HighModulation => {
            let med = h_exp + rng.gen_range(3..=8);
            let order = shuffled(rng);
            l[order[0]] = pow2(med + rng.gen_range(0..=1));
            l[order[1]] = pow2(med);
            l[order[2]] = pow2(rng.gen_range(0..=med));
        }
        Regime::PpCoherence => {
            let max = h_exp + rng.gen_range(0..=1);
            let order = shuffled(rng);
            l[order[0]] = pow2(max);
            l[order[1]] = pow2(rng.gen_range(0..=max));
            l[order[2]] = pow2(rng.gen_range(0..=max));
        }
        Regime::PmCoherence => {
            let max = h_exp + rng.gen_range(0..=1);
            l = [pow2(rng.gen_range(0..=max)), pow2(rng.gen_range(0..=max)), pow2(rng.gen_range(0..=max))];
            l[small] = pow2(max);
        }
        Regime::Vanishing | Regime::Unclassified => {
            let med = rng.gen_range(0..=h_exp);
            let order = shuffled(rng);
            l[order[0]] = pow2(h_exp);
            l[order[1]] = pow2(med);
            l[order[2]] = pow2(rng.gen_range(0..=med));
            match rng.gen_range(0..3) {
                0 => n[(small + 1) % 3] = pow2(j + 3 + rng.gen_range(0..3)),
                1 => {
                    let hv = h_exp + if rng.gen() { 4 } else { -5 - i.min(2) };
                    return DyadicBlockSpec::new(n, pow2(hv.max(0)), l);
                }
                _ => l[order[0]] = pow2(h_exp + 3 + rng.gen_range(0..4)),
            }
        }
    }
    DyadicBlockSpec::new(n, h, l)
}

fn shuffled<R: Rng>(rng: &mut R) -> [usize; 3] {
    let mut o = [0, 1, 2];
    for k in (1..3).rev() {
        o.swap(k, rng.gen_range(0..=k));
    }
    o
}

/// One row of a regime sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub regime: String,
    #[serde(rename = "N1")]
    pub n1: f64,
    #[serde(rename = "N2")]
    pub n2: f64,
    #[serde(rename = "N3")]
    pub n3: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "L3")]
    pub l3: f64,
    pub lower_bound: f64,
    pub bound_rhs: f64,
    pub ratio: f64,
    pub trials: usize,
    pub resolution: usize,
    pub seed: u64,
}

impl SweepRow {
    pub fn new(spec: &DyadicBlockSpec, est: &MultiplierEstimate, seed: u64) -> Self {
        Self {
            regime: est.regime.label().to_string(),
            n1: spec.n[0],
            n2: spec.n[1],
            n3: spec.n[2],
            h: spec.h,
            l1: spec.l[0],
            l2: spec.l[1],
            l3: spec.l[2],
            lower_bound: est.lower_bound,
            bound_rhs: est.bound_rhs,
            ratio: est.ratio,
            trials: est.trials,
            resolution: est.resolution,
            seed,
        }
    }
}
