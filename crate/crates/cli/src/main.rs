//! `dbo-lab`: batch driver for the experiments of the `dbo_lab` crate.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! numerical failures (blow-up, divergence, unconverged quadrature, a
//! measured bound above its ceiling).

mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{expand_config, Cli, Command, Common};
use error::CliError;

fn init_pool(common: &Common) -> Result<(), CliError> {
    let jobs = match common.jobs {
        Some(j) => Some(j),
        None => match std::env::var("DBO_LAB_JOBS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Usage(format!("DBO_LAB_JOBS={v} is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print().ok();
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    match &cli.command {
        Command::Evolve(a) => init_pool(&a.common).and_then(|_| commands::evolve(a)),
        Command::Inflate(a) => init_pool(&a.common).and_then(|_| commands::inflate(a)),
        Command::Dyadic(a) => init_pool(&a.common).and_then(|_| commands::dyadic(a)),
        Command::Heat(a) => init_pool(&a.common).and_then(|_| commands::heat(a)),
        Command::Xnorm(a) => init_pool(&a.common).and_then(|_| commands::xnorm(a)),
        Command::Picard(a) => init_pool(&a.common).and_then(|_| commands::picard(a)),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
