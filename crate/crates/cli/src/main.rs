//! `gei`: independence tests between time series through generalized
//! errors, Monte-Carlo studies and model fitting.

mod commands;
mod config;
mod data;
mod dependogram;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

/// Result of a command that did not fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Independence rejected and `--fail-on-reject` given.
    Reject,
}

#[derive(Parser)]
#[command(name = "gei", version, about = "Conditional independence tests between time series via generalized errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit models, compute generalized errors and test independence.
    Test(commands::test::TestArgs),
    /// Run Monte-Carlo studies from a study file.
    Simulate(commands::simulate::SimulateArgs),
    /// Fit one model to one column and write it as JSON.
    Fit(commands::fit::FitArgs),
}

/// Caps the worker pool at `GEI_THREADS` when set.
fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("GEI_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .with_context(|| format!("GEI_THREADS must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

fn run(cli: &Cli) -> Result<Outcome> {
    configure_threads()?;
    match &cli.command {
        Command::Test(a) => commands::test::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Fit(a) => commands::fit::run(a),
    }
}

fn main() -> ExitCode {
    // usage errors exit with 1, keeping 2 for rejections
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Reject) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
