//! Frequency-space foundation shared by every other module.
//!
//! Fourier convention: `f̂(ξ) = ∫ e^{-ixξ} f(x) dx` with the `1/2π` factor on
//! the inverse. A [`SpectralField`] stores samples of `f̂` at the grid
//! frequencies `k·dξ`, so on a torus of length `L`
//!
//! ```text
//! f(x_j) = (1/L) Σ_k f̂(k dξ) e^{i k dξ x_j},     f̂(k dξ) = dx Σ_j f(x_j) e^{-i k dξ x_j}
//! ```
//!
//! and every norm is a Riemann sum with its `dξ` (or `dx`) weight written out.

mod field;
mod grid;
pub(crate) mod symbols;

pub(crate) use field::lp_of_samples;
pub use field::{SobolevIndex, SpectralField};
pub use grid::FourierGrid;
pub use symbols::{dispersion_p, dissipation_symbol, hilbert_symbol, japanese};
