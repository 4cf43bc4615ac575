//! Command-line front end: configuration, subcommands and writers.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure
//! or a failed physical hypothesis.

pub mod commands;
pub mod config;
pub mod output;
pub mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::rates::RatesError;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Pipeline(#[from] crate::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Pipeline(crate::Error::Hamiltonian(_))
            | CliError::Pipeline(crate::Error::Rates(RatesError::FormFactor(_))) => 1,
            CliError::Pipeline(_) | CliError::Failed(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dressed-cascade", version, about = "Fluorescence cascade of a dressed two-level atom")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config and DRESSED_CASCADE_OUT).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lines, density, rates and summary for one parameter point.
    Spectrum(Common),
    /// One summary row per value of the sweep parameter.
    Sweep(Common),
    /// Oracle suites with measured residuals.
    Validate(Common),
    /// Full master-equation trajectory on a band window.
    Dynamics {
        #[command(flatten)]
        common: Common,
        /// Horizon in units of 1/Γ_pop.
        #[arg(long)]
        horizon: Option<f64>,
        /// Time step in units of 1/Γ_pop.
        #[arg(long)]
        dt: Option<f64>,
    },
}

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Problems that did not stop the run but make it unsuccessful.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let common = match &cli.command {
        Command::Spectrum(c) | Command::Sweep(c) | Command::Validate(c) => c,
        Command::Dynamics { common, .. } => common,
    };
    let cfg = RunConfig::load(&common.config)?;
    let dir = cfg.output_dir(common.out.as_deref());
    output::prepare_dir(&dir)?;
    match &cli.command {
        Command::Spectrum(_) => commands::cmd_spectrum(&cfg, &dir),
        Command::Sweep(_) => commands::cmd_sweep(&cfg, &dir),
        Command::Validate(_) => commands::cmd_validate(&cfg, &dir),
        Command::Dynamics { horizon, dt, .. } => commands::cmd_dynamics(&cfg, &dir, *horizon, *dt),
    }
}

/// Parses `std::env::args`, runs, and reports on stderr.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for msg in &outcome.failures {
                eprintln!("failure: {msg}");
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
