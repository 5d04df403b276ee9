//! Command-line harness around `mmax-core`: incidence-file ingestion, bounds
//! on real data, and the simulation sweeps. All logarithms are natural.

pub mod args;
pub mod commands;
pub mod format;
pub mod input;
pub mod sweeps;

use std::io::Write;

pub use args::{Cli, Command};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) | CliError::Io(_) => EXIT_DATA,
        }
    }
}

impl From<mmax_core::Error> for CliError {
    fn from(e: mmax_core::Error) -> Self {
        use mmax_core::Error as E;
        match e {
            E::ParamOutOfRange { .. } | E::AlphabetTooSmall { .. } => CliError::Usage(e.to_string()),
            E::InvalidSample(_) | E::Degenerate(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs one parsed invocation, writing its JSON object to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let value = match cli.command {
        Command::Bound(a) => commands::bound(&a)?,
        Command::SimulateIntervals(a) => commands::simulate_intervals(&a)?,
        Command::CompareRegimes(a) => commands::compare_regimes(&a)?,
        Command::SimulateStopping(a) => commands::simulate_stopping(&a)?,
        Command::Diagnose(a) => commands::diagnose(&a)?,
        Command::Generate(a) => commands::generate(&a)?,
    };
    serde_json::to_writer_pretty(&mut *out, &value).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}
