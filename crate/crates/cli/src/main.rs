//! Command-line front end for search-cost scoring, simulation, ranking
//! meta-evaluation, and verification.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or
//! configuration error.

mod commands;
mod formats;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{run_rank, run_score, run_simulate, run_verify};

#[derive(Debug, Parser)]
#[command(
    name = "pandora",
    version,
    about = "Score forecasts by expected sequential-search cost, simulate searches, \
             rank models, and verify the underlying identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-instance and mean metric values for a prediction file.
    Score(commands::ScoreArgs),
    /// Sequential-search traces and aggregate cost.
    Simulate(commands::SimulateArgs),
    /// Ranking meta-evaluation: Kendall's tau against simulated cost.
    Rank(commands::RankArgs),
    /// Run the verification suites.
    Verify(commands::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Score(args) => run_score(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Rank(args) => run_rank(args),
        Command::Verify(args) => run_verify(args),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
