use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when neither `--seed` nor the config file gives one.
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_N: u64 = 1_000;
pub const DEFAULT_REPS: u64 = 1_000;

#[derive(Debug, Parser)]
#[command(
    name = "rumour",
    version,
    about = "Limits, CLT covariance and exact simulation of a general stochastic rumour model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limiting fractions of ignorants and uninterested individuals.
    Limit(CommonArgs),
    /// CLT constants, covariance matrix and fluid absorption time.
    Clt {
        #[command(flatten)]
        common: CommonArgs,
        /// Also integrate the covariance ODE and report the largest deviation.
        #[arg(long)]
        cross_check: bool,
    },
    /// Fluid-limit trajectory (x, u, y) on a uniform time grid.
    Fluid {
        #[command(flatten)]
        common: CommonArgs,
        /// End of the grid [default: fluid absorption time].
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Monte Carlo statistics of the final state.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Also write one CSV row per replication to this file.
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
    },
    /// Compare Monte Carlo statistics with the limit and covariance.
    /// Exits 0 on pass and 1 on statistical failure.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Include minor outbreaks in the comparison.
        #[arg(long)]
        include_minor: bool,
    },
    /// List the presets and their parameter mappings.
    Presets(OutputArgs),
    /// Exact law of the final state for a small population.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest population accepted.
        #[arg(long, default_value_t = rumour_core::simulate::DEFAULT_ORACLE_MAX_N)]
        max_n: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    JumpChain,
    ExactTime,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format [default: json].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Population size (number of initial ignorants).
    #[arg(long)]
    pub n: Option<u64>,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Number of replications [default: 1000].
    #[arg(long)]
    pub reps: Option<u64>,
    /// Master seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism].
    #[arg(long, env = "RUMOUR_WORKERS")]
    pub workers: Option<usize>,
    /// Simulation mode [default: jump-chain].
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

/// Either a preset with its auxiliary parameters, or the five general
/// parameters given explicitly.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Named model: dk, mt, rho, hayes, apq_dk, apq_mt, pearce, kawachi.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, help_heading = "Preset parameters")]
    pub rho: Option<f64>,
    #[arg(long, help_heading = "Preset parameters")]
    pub alpha: Option<f64>,
    #[arg(long, help_heading = "Preset parameters")]
    pub p: Option<f64>,
    #[arg(long, help_heading = "Preset parameters")]
    pub q: Option<f64>,
    #[arg(long, help_heading = "Preset parameters")]
    pub q1: Option<f64>,
    #[arg(long, help_heading = "Preset parameters")]
    pub q2: Option<f64>,
    #[arg(long, help_heading = "Preset parameters")]
    pub r: Option<f64>,
    #[arg(long, help_heading = "Preset parameters")]
    pub beta: Option<f64>,
    #[arg(long, help_heading = "Preset parameters")]
    pub theta: Option<f64>,
    /// Contact rate; also used without a preset.
    #[arg(long, help_heading = "General parameters")]
    pub lambda: Option<f64>,
    /// Also the gamma of the kawachi preset.
    #[arg(long, help_heading = "General parameters")]
    pub gamma: Option<f64>,
    #[arg(long, help_heading = "General parameters")]
    pub theta1: Option<f64>,
    #[arg(long, help_heading = "General parameters")]
    pub theta2: Option<f64>,
    #[arg(long, help_heading = "General parameters")]
    pub delta: Option<f64>,
}

impl ModelArgs {
    pub fn is_empty(&self) -> bool {
        self.preset.is_none()
            && self.preset_values().iter().all(|(_, v)| v.is_none())
            && self.general_values().iter().all(|(_, v)| v.is_none())
    }

    pub fn preset_values(&self) -> [(&'static str, Option<f64>); 9] {
        [
            ("rho", self.rho),
            ("alpha", self.alpha),
            ("p", self.p),
            ("q", self.q),
            ("q1", self.q1),
            ("q2", self.q2),
            ("r", self.r),
            ("beta", self.beta),
            ("theta", self.theta),
        ]
    }

    pub fn general_values(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("delta", self.delta),
        ]
    }
}
