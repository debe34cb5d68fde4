//! Spectral laboratory for the dissipative Benjamin–Ono equation
//!
//! ```text
//! ∂_t u + H ∂_x² u + |D|^α u + u ∂_x u = 0,    0 ≤ α ≤ 2
//! ```
//!
//! The crate is organised from the bottom up:
//!
//! - [`spectral`]: grids, fields, multiplier symbols and norms.
//! - [`semigroup`]: the linear propagator and the generalised heat kernel.
//! - [`evolution`]: Picard iteration, an exponential integrator, energy diagnostics.
//! - [`xnorm`]: weighted space-time norms and probes of the linear and bilinear estimates.
//! - [`iterates`]: explicit high-frequency data and quadrature for the second and third Picard iterates.
//! - [`dyadic`]: the resonance function and lower bounds for dyadic multiplier blocks.

pub mod error;
pub mod dyadic;
pub mod evolution;
pub mod fit;
pub mod iterates;
pub mod quad;
pub mod semigroup;
pub mod spectral;
pub mod xnorm;

mod fft;

pub use error::{LabError, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/semigroup.md")]
    mod semigroup {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/xnorm.md")]
    mod xnorm {}
    #[doc = include_str!("../../../book/src/iterates.md")]
    mod iterates {}
    #[doc = include_str!("../../../book/src/dyadic.md")]
    mod dyadic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
