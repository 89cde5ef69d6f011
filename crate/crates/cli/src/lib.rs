//! Command-line front end for universal detector experiments.
//!
//! Exit status: 0 on success, 1 when a check or estimation fails, 2 on a
//! usage or configuration error.

pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ExperimentConfig, OutputFormat};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "unidet",
    version,
    about = "Validate and simulate universal quantum detectors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check POVM validity, universality and the exact estimation identity.
    Validate(Flags),
    /// Run one Monte Carlo estimate of Tr[ρO].
    Estimate(Flags),
    /// Run estimates over a schedule of sample sizes.
    Scan(Flags),
}

/// Flags override the corresponding config fields.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON config file, or `-` for stdin.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for report files.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Detector identifier, e.g. weyl:d=3, sud:d=2, su2:j=1/2, locc:d=2.
    #[arg(long, value_name = "ID")]
    pub detector: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Record wall-clock time (makes outputs run-dependent).
    #[arg(long)]
    pub timing: bool,
}

impl Flags {
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.seed = Some(v);
        }
        if let Some(v) = self.n {
            cfg.n = Some(v);
        }
        if let Some(v) = &self.detector {
            cfg.detector = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.format = Some(v);
        }
        if self.timing {
            cfg.timing = Some(true);
        }
        Ok(cfg)
    }
}

/// Runs a parsed command, writing human-readable output to `out`.
/// `Ok(false)` means a validation check failed.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    match &cli.command {
        Command::Validate(f) => commands::validate(&f.resolve()?, out),
        Command::Estimate(f) => commands::estimate(&f.resolve()?, out).map(|_| true),
        Command::Scan(f) => commands::scan(&f.resolve()?, out).map(|_| true),
    }
}
