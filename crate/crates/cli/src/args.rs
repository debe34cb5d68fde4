use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dbo-lab", version, about = "Experiments for the dissipative Benjamin-Ono equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the equation with the exponential stepper and export the energy trace
    Evolve(EvolveArgs),
    /// Scan the growth of a Picard iterate along a sequence of N
    Inflate(InflateArgs),
    /// Lower bounds for random dyadic multiplier blocks of one regime
    Dyadic(DyadicArgs),
    /// Power law of the dissipative kernel in time
    Heat(HeatArgs),
    /// Probes of the weighted space-time norms
    Xnorm(XnormArgs),
    /// Solve the Duhamel equation by fixed-point iteration
    Picard(PicardArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Stem of the output files (defaults to the subcommand name)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Worker threads; falls back to DBO_LAB_JOBS
    #[arg(long)]
    #[serde(skip)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialData {
    Gaussian,
    Sech,
    Zero,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Sobolev index of the hs_norm column
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s: f64,
    /// Number of Fourier modes
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    /// Period of the domain
    #[serde(rename = "L")]
    #[arg(long = "L", default_value_t = 64.0 * std::f64::consts::PI)]
    pub period: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Final time
    #[serde(rename = "T")]
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_final: f64,
    #[arg(long, value_enum, default_value_t = InitialData::Gaussian)]
    pub u0: InitialData,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub amp: f64,
    /// Keep every k-th step in the output
    #[arg(long, default_value_t = 10)]
    pub every: usize,
    /// Also dump the retained spectra as JSON
    #[arg(long)]
    pub spectra: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct InflateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// second, third (resolved by alpha), third_general, third_alpha2, heat
    #[arg(long)]
    pub variant: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[serde(rename = "Nmin")]
    #[arg(long = "Nmin", default_value_t = 64.0)]
    pub n_min: f64,
    #[serde(rename = "Nmax")]
    #[arg(long = "Nmax", default_value_t = 4096.0)]
    pub n_max: f64,
    /// Step of log2 N between scan points
    #[arg(long, default_value_t = 1)]
    pub step: u32,
    /// Frequency samples across the output band
    #[arg(long, default_value_t = 64)]
    pub band_samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct DyadicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// high, pp, pm or vanish
    #[arg(long)]
    pub regime: String,
    /// Interpolation parameter of the (+-) bound
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cells per window axis
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    #[arg(long, default_value_t = 16)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub rounds: usize,
    /// Frequencies stay below 2^max_n_exp
    #[arg(long, default_value_t = 6)]
    pub max_n_exp: i32,
    /// Largest acceptable lower_bound / bound_rhs
    #[arg(long, default_value_t = 10.0)]
    pub ceiling: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct HeatArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    /// Lebesgue exponent; `inf` is accepted
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// First time is 2^-k0
    #[arg(long, default_value_t = 2)]
    pub k0: i32,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum XnormCheck {
    Plancherel,
    Equivalence,
    Linear,
    Contract,
    Bilinear,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct XnormArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub check: XnormCheck,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.25)]
    pub theta: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spatial modes on a 2π torus
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Time samples on the window
    #[arg(long, default_value_t = 256)]
    pub nt: usize,
    /// Half-width of the time window
    #[arg(long, default_value_t = 4.0)]
    pub window: f64,
    /// Largest wavenumber of the random fields
    #[arg(long, default_value_t = 8)]
    pub kmax: i64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct PicardArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Sobolev index of the iteration distance
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[serde(rename = "L")]
    #[arg(long = "L", default_value_t = 16.0 * std::f64::consts::PI)]
    pub period: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[serde(rename = "T")]
    #[arg(long = "T", default_value_t = 0.25)]
    pub t_final: f64,
    #[arg(long, value_enum, default_value_t = InitialData::Gaussian)]
    pub u0: InitialData,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub amp: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
}

/// Splices `--config FILE` into the argument list: every `key = value` line
/// becomes `--key value` right after the subcommand, so that flags given on
/// the command line, which come later, override it. Underscores in keys are
/// read as dashes, so the `config` line of an output file can be replayed.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            let path = it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key = value", path.display(), lineno + 1))
        })?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        match value {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(value));
            }
        }
    }
    // binary name, subcommand, config entries, remaining flags
    let at = rest.len().min(2);
    let tail = rest.split_off(at);
    rest.extend(injected);
    rest.extend(tail);
    Ok(rest)
}
