//! `pdiv` — checks and simulations for finite-state discrete-time
//! stochastic processes stored as joint-probability tensors.
//!
//! Exit codes: 0 when every requested check passes, 1 when the input was
//! valid but some check failed, 2 on malformed input or usage errors.

mod commands;
mod report;
mod spec_file;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub(crate) type CliError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(
    name = "pdiv",
    version,
    about = "Consistency, divisibility, and Markovianity checks for finite-state stochastic processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full check battery on a process spec file
    Check(CheckArgs),
    /// Write the exact tensor of a named builtin as a spec file
    Build(BuildArgs),
    /// Sample a block process and export realization and statistics CSVs
    Simulate(SimulateArgs),
    /// Run the vaccination-schedule model and export a per-schedule CSV
    Epidemic(EpidemicArgs),
}

#[derive(clap::Args)]
pub(crate) struct CheckArgs {
    /// Path to the process spec (JSON)
    pub spec: PathBuf,
    /// Order of the necessary-condition check
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(3..=5))]
    pub order: u8,
    /// Emit the report as JSON instead of a table
    #[arg(long)]
    pub json: bool,
}

#[derive(clap::Args)]
pub(crate) struct BuildArgs {
    /// One of: feller, two-state-markov, two-state-perturbed
    pub builtin: String,
    /// Probability of starting in state 0
    #[arg(long)]
    pub q1: Option<f64>,
    /// Memory strength of the perturbation
    #[arg(long)]
    pub eps: Option<f64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub(crate) struct SimulateArgs {
    /// Path to the process spec (JSON, order-3 tensor)
    pub spec: PathBuf,
    /// Number of blocks to sample (overrides the spec's blocks.K; 200 when
    /// neither is given)
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Master seed (default: PDIV_SEED environment variable, then 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Realization CSV path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Statistics CSV path (stdout when omitted)
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
    /// Worker threads; the realization is identical for every thread count
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(clap::Args)]
pub(crate) struct EpidemicArgs {
    /// Population size
    #[arg(long = "N")]
    pub population: f64,
    /// Probability of skipping the first dose
    #[arg(long)]
    pub q1: f64,
    /// Awareness/memory parameter
    #[arg(long)]
    pub eps: f64,
    /// Number of consecutive schedules
    #[arg(long, default_value_t = 1)]
    pub schedules: usize,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Draw binomial counts instead of reporting expectations
    #[arg(long)]
    pub sample: bool,
    /// Seed for --sample (default: PDIV_SEED environment variable, then 0)
    #[arg(long)]
    pub seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Check(args) => commands::cmd_check(args),
        Command::Build(args) => commands::cmd_build(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Epidemic(args) => commands::cmd_epidemic(args),
    };
    std::process::exit(match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    });
}
