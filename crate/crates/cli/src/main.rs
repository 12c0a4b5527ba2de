use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use collapse_cli::{load_config, run, thread_pool, ExperimentKind};

/// Stochastic-collapse simulations.
#[derive(Debug, Parser)]
#[command(name = "collapse-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Noisy Stern–Gerlach transition probability over a time grid.
    SternGerlach(RunArgs),
    /// Finite detector environment against the stochastic estimator.
    Environment(RunArgs),
    /// Mean of cos ζ over a grid of dimensionless phases.
    Visibility(RunArgs),
    /// Wall-time scaling of exact and product-state evolution.
    Bench(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: Cli) -> Result<()> {
    let (kind, args) = match cli.command {
        Command::SternGerlach(a) => (ExperimentKind::SternGerlach, a),
        Command::Environment(a) => (ExperimentKind::Environment, a),
        Command::Visibility(a) => (ExperimentKind::VisibilityCurve, a),
        Command::Bench(a) => (ExperimentKind::Scaling, a),
    };
    let mut config = load_config(&args.config, Some(kind))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = thread_pool()?.install(|| run(&config, &args.out))?;
    println!("{}", out.results.display());
    println!("{}", out.manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
