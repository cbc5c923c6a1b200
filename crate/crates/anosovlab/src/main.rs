use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anosovlab", about = "Experiments on suspension flows over hyperbolic toral automorphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Report directory (default: the config's `out`, else `out/<subcommand>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Reports do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral enumeration of companion matrices with the gap inequality.
    Catalog(RunArgs),
    /// Periodic obstructions and the coboundary solve.
    Livshits(RunArgs),
    /// Temporal distance samples, series against geometric.
    Pcf(RunArgs),
    /// Matching-kernel dimension and conjugacy patch reconstruction.
    Subbundle(RunArgs),
    /// Holonomy derivative check and remainder exponent.
    Claim44(RunArgs),
    /// Grassmannian sweep of perturbed unstable images.
    Sweep(RunArgs),
    /// Bunching table over a grid of exponents.
    Bunching(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Catalog(a) => ("catalog", a),
        Command::Livshits(a) => ("livshits", a),
        Command::Pcf(a) => ("pcf", a),
        Command::Subbundle(a) => ("subbundle", a),
        Command::Claim44(a) => ("claim44", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Bunching(a) => ("bunching", a),
    };
    match anosovlab::run_cli(name, &args.config, args.out.as_deref(), args.seed, args.workers) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("anosovlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
