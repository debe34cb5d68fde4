use thiserror::Error;

/// Errors raised by the laboratory routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dissipation exponent alpha = {0} outside the valid range [0, 2]")]
    AlphaOutOfRange(f64),

    #[error("grids do not match")]
    GridMismatch,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("frequency interval of width {width} is resolved by only {points} grid points (need >= 8)")]
    UnresolvedInterval { width: f64, points: usize },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("blow-up detected at t = {t}")]
    BlowUp {
        t: f64,
        partial: Box<crate::evolution::Trajectory>,
    },

    #[error("Picard iteration failed to contract after {iterations} iterations")]
    Divergence { iterations: usize, history: Vec<f64> },

    #[error("Picard iteration hit the iteration cap ({iterations})")]
    MaxIterations { iterations: usize, history: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=2.0).contains(&alpha) {
        Ok(())
    } else {
        Err(LabError::AlphaOutOfRange(alpha))
    }
}
