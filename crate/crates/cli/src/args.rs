use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flatsmc_core::{Chattering, EquivalentMode};

#[derive(Debug, Parser)]
#[command(name = "flatsmc", version, about = "Simulate and compare sliding mode trackers for differential-drive robots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scenario's controller; writes trace.csv, metrics.json, manifest.json.
    Run(RunArgs),
    /// Run the controller and the baseline on the same scenario and tabulate metrics.
    Compare(RunArgs),
    /// Check closed-form settling times and the reaching condition numerically.
    Verify {
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank gain sets over a grid or random sample.
    Sweep {
        /// Sweep description (TOML).
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Adjustments applied on top of a scenario file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed_override: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt_override: Option<f64>,
    /// Equivalent-control variant of the primary controller.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Switching function of the primary controller.
    #[arg(long, value_enum)]
    pub chattering: Option<ChatteringArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Paper,
    Derived,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ChatteringArg {
    Sign,
    Boundary,
}

impl From<ModeArg> for EquivalentMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => EquivalentMode::Paper,
            ModeArg::Derived => EquivalentMode::Derived,
        }
    }
}

impl From<ChatteringArg> for Chattering {
    fn from(c: ChatteringArg) -> Self {
        match c {
            ChatteringArg::Sign => Chattering::Sign,
            ChatteringArg::Boundary => Chattering::BoundaryLayer {
                width: Chattering::DEFAULT_WIDTH,
            },
        }
    }
}
