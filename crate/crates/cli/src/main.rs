//! `reclaim`: minimum-energy speed assignment from the command line.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reclaim_core::continuous::Structure;

/// Exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "reclaim", version, about = "Minimum-energy speed assignment for task graphs under a deadline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Human-readable table instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an instance under one speed model.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Write the VDD-hopping linear program to this file.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Check a schedule against an instance.
    Validate {
        instance: PathBuf,
        schedule: PathBuf,
        /// Override the instance deadline.
        #[arg(long)]
        deadline: Option<f64>,
    },
    /// Optimal energy under every model the parameters allow.
    Compare {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Approximate the discrete or incremental optimum through VDD-hopping.
    Approx {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Precision of the geometric mode set.
        #[arg(long = "K", alias = "k", default_value_t = 2)]
        k: u32,
    },
    /// Build the chain instance for a 2-Partition input.
    Gen2p {
        /// Positive integers, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
    },
    /// Total power over time of a schedule, as `t,power` CSV.
    PowerProfile {
        instance: PathBuf,
        /// Schedule to plot; the continuous optimum when absent.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Write a random instance.
    Generate {
        #[arg(long, value_enum, default_value_t = Kind::Dag)]
        kind: Kind,
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Processors for `dag` instances.
        #[arg(long, default_value_t = 2)]
        processors: usize,
        /// Edge probability for `dag` instances.
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        /// Deadline as a multiple of the makespan at unit speed.
        #[arg(long, default_value_t = 1.0)]
        slack: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Dag,
    Tree,
    Spg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Continuous,
    Discrete,
    Vdd,
    Incremental,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fallback {
    Dag,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Maximum speed (`inf` for none).
    #[arg(long)]
    pub smax: Option<f64>,
    #[arg(long)]
    pub smin: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Speeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<f64>>,
    /// Force a continuous solver instead of detecting the graph's shape.
    #[arg(long, value_parser = parse_structure)]
    pub structure: Option<Structure>,
    /// Solve series-parallel graphs with finite s_max numerically.
    #[arg(long, value_enum)]
    pub fallback: Option<Fallback>,
    /// Node limit for the exact discrete search.
    #[arg(long)]
    pub node_budget: Option<u64>,
    /// Override the instance deadline.
    #[arg(long)]
    pub deadline: Option<f64>,
}

fn parse_structure(s: &str) -> Result<Structure, String> {
    s.parse().map_err(|e: reclaim_core::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RECLAIM_LOG", "off")).init();
    let cli = Cli::parse();
    ExitCode::from(commands::run(&cli))
}
