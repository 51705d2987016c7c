//! Command-line front end: argument parsing, subcommand dispatch, exit
//! codes and output plumbing.

pub mod commands;
pub mod config;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

pub use config::{RunConfig, SweepSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::VerifyFailed(_) => 3,
        }
    }
}

/// Arithmetic used for orbits. `auto` picks extended precision where
/// binary64 is known to mislead (long chaotic orbits) and binary64
/// elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    Auto,
    Double,
    Extended,
}

#[derive(Debug, Parser)]
#[command(
    name = "savings-chaos",
    version,
    about = "Simulate and classify a threshold-deposit savings process"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub args: Args,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write the orbit of each initial balance as CSV.
    Simulate,
    /// Decide between asymptotic periodicity and a Cantor attractor.
    Classify,
    /// Count visits to an interval, with the ergodic prediction when chaotic.
    Freq,
    /// Search for a pair of nearby balances whose orbits separate.
    Sensitivity,
    /// Print the derived chaotic parameters for a base b.
    ChaoticParams,
    /// Classify every cell of a parameter grid.
    Sweep,
    /// Run the built-in invariant checks.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Classify => "classify",
            Command::Freq => "freq",
            Command::Sensitivity => "sensitivity",
            Command::ChaoticParams => "chaotic-params",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Default, Clone, clap::Args)]
pub struct Args {
    /// Real interest rate, in (-1, 0).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Deposit below the threshold.
    #[arg(long, global = true)]
    pub v1: Option<f64>,
    /// Deposit at or above the threshold.
    #[arg(long, global = true)]
    pub v2: Option<f64>,
    /// Balance threshold.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Use the chaotic family with this base b > 1 instead of explicit parameters.
    #[arg(long = "chaotic-b", global = true)]
    pub chaotic_b: Option<f64>,
    /// Accuracy target for the derived threshold.
    #[arg(long = "precision-target", global = true)]
    pub precision_target: Option<f64>,
    /// Initial balance (repeatable).
    #[arg(long, global = true)]
    pub s0: Vec<f64>,
    /// Number of steps to simulate.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Window length for visit counts.
    #[arg(long = "N", global = true)]
    pub window: Option<usize>,
    /// Closed interval `lo,hi` for visit counts.
    #[arg(long = "J", global = true)]
    pub interval: Option<String>,
    /// Iterates discarded before sampling the orbit
    #[arg(long = "burn-in", global = true)]
    pub burn_in: Option<usize>,
    /// Orbit samples collected after burn-in for clustering.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Coarsest cluster radius.
    #[arg(long, global = true)]
    pub resolution: Option<f64>,
    /// Perturbation radius for the sensitivity probe.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Iteration budget for cycle detection and the sensitivity probe
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Longest cycle period searched for
    #[arg(long = "max-period", global = true)]
    pub max_period: Option<usize>,
    /// Tolerance; for `verify`, replaces every check's tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Gap truncation order for `verify`'s semiconjugacy checks.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML run configuration; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Arithmetic for orbit iteration (auto: extended for the chaotic family)
    #[arg(long, global = true, value_enum)]
    pub precision: Option<PrecisionMode>,
    /// Significand bits for extended precision (default: sized to the run).
    #[arg(long, global = true)]
    pub bits: Option<usize>,
    /// Sweep axis for r: `value` or `min,max,step`.
    #[arg(long = "sweep-r", global = true, allow_hyphen_values = true)]
    pub sweep_r: Option<String>,
    /// Sweep axis for v1
    #[arg(long = "sweep-v1", global = true)]
    pub sweep_v1: Option<String>,
    /// Sweep axis for v2
    #[arg(long = "sweep-v2", global = true)]
    pub sweep_v2: Option<String>,
    /// Sweep axis for rho
    #[arg(long = "sweep-rho", global = true)]
    pub sweep_rho: Option<String>,
}

/// Runs one command and returns its textual output.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<String, CliError> {
    match command {
        Command::Simulate => commands::cmd_simulate(cfg),
        Command::Classify => commands::cmd_classify(cfg),
        Command::Freq => commands::cmd_freq(cfg),
        Command::Sensitivity => commands::cmd_sensitivity(cfg),
        Command::ChaoticParams => commands::cmd_chaotic_params(cfg),
        Command::Sweep => commands::cmd_sweep(cfg),
        Command::Verify => {
            let report = verify::cmd_verify(cfg);
            let text = report.render();
            if report.passed() {
                Ok(text)
            } else {
                // the report is still useful on failure
                emit(cfg.out.as_deref(), &text)?;
                Err(CliError::VerifyFailed(format!(
                    "{} of {} checks failed",
                    report.failures(),
                    report.checks.len()
                )))
            }
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.args)?;
    let text = execute(cli.command, &cfg)?;
    emit(cfg.out.as_deref(), &text)
}

/// Entry point for the binary: parses `std::env::args` and maps errors to
/// exit codes.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
