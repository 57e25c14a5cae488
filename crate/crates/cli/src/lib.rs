//! Command-line front end for `ctmc-sens`.
//!
//! The binary `ctmcsens` is a thin wrapper over [`run`]; each subcommand is
//! also exposed as a function (`cmd_*`) returning structured results, so
//! the same code paths can be driven from tests.
//!
//! Exit codes: 0 on success, 1 for configuration errors (bad flags, unknown
//! parameters, unparsable models, non-affine model for a moment oracle),
//! 2 for runtime failures during simulation or evaluation.

mod args;
mod bench;
mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub use args::{
    BenchArgs, Cli, Command, EstimateArgs, ModeArg, ModelArgs, OracleArgs, OracleQuantity, RunArgs, SimMethod, SimulateArgs,
    TraceArgs,
};
pub use bench::{cmd_bench, BenchRow, BenchTable};
pub use commands::{cmd_estimate, cmd_oracle, cmd_simulate, cmd_trace, load_model, LoadedModel, OracleOutcome, TraceOutcome};
pub use output::{parse_grid, render_svg, CsvRow, CSV_HEADER};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ctmc_sens::estimators::EstimateError> for CliError {
    fn from(e: ctmc_sens::estimators::EstimateError) -> Self {
        use ctmc_sens::estimators::EstimateError as E;
        match e {
            E::Path { .. } | E::Observable { .. } | E::NonFiniteObservable { .. } | E::Derivative { .. } | E::Pool(_) => {
                CliError::Runtime(e.to_string())
            }
            E::UnknownParam(_) | E::Epsilon(_) | E::Paths | E::Horizon(_) | E::Grid | E::InitialState { .. } => {
                CliError::Config(e.to_string())
            }
        }
    }
}

impl From<ctmc_sens::oracle::OracleError> for CliError {
    fn from(e: ctmc_sens::oracle::OracleError) -> Self {
        use ctmc_sens::oracle::OracleError as E;
        match e {
            E::Propensity(_) | E::Leak { .. } | E::Observable(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Parses `argv` and runs the selected subcommand, writing results to
/// `out` and diagnostics to standard error. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
