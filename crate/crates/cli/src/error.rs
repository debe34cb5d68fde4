use std::fmt;
use std::io;

use dbo_lab::LabError;

/// Failures mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or output path: exit 1.
    Usage(String),
    /// Blow-up, divergence, unconverged quadrature or a failed check: exit 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::InvalidParameter(_)
            | LabError::AlphaOutOfRange(_)
            | LabError::GridMismatch
            | LabError::UnresolvedInterval { .. } => CliError::Usage(e.to_string()),
            LabError::Degenerate(_)
            | LabError::Quadrature(_)
            | LabError::BlowUp { .. }
            | LabError::Divergence { .. }
            | LabError::MaxIterations { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("json: {e}"))
    }
}
