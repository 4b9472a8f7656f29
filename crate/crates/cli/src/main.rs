//! `mompca`: robust PCA on the command line.
//!
//! Every subcommand is deterministic given its inputs, flags, and `--seed`,
//! and emits a manifest recording the resolved parameters and input hashes.
//! Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O
//! error.

mod commands;
mod util;

use clap::{Parser, Subcommand};

use mompca_core::Error;

#[derive(Parser)]
#[command(
    name = "mompca",
    version,
    about = "Median-of-means PCA: outlier-robust subspace fitting and friends"
)]
struct Cli {
    /// Cap internal parallelism (default: all cores). Results are identical
    /// for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV of observations and persist it as JSON.
    Fit(commands::fit::FitArgs),
    /// Project new observations onto a fitted model's subspace.
    Transform(commands::transform::TransformArgs),
    /// Score observations by squared residual and label the top fraction.
    Anomaly(commands::anomaly::AnomalyArgs),
    /// Run the seeded low-rank recovery benchmark against the classical
    /// full-sample baseline.
    Bench(commands::bench::BenchArgs),
    /// Split a grayscale PGM frame sequence into background and object map.
    Background(commands::background::BackgroundArgs),
    /// Evaluate the concentration-bound quantities for a configuration.
    Bounds(commands::bounds::BoundsArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} threads: {e}");
            std::process::exit(2);
        }
    }

    let result = match cli.command {
        Command::Fit(args) => commands::fit::run(args),
        Command::Transform(args) => commands::transform::run(args),
        Command::Anomaly(args) => commands::anomaly::run(args),
        Command::Bench(args) => commands::bench::run(args),
        Command::Background(args) => commands::background::run(args),
        Command::Bounds(args) => commands::bounds::run(args),
    };

    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        2
    } else if err.is_numerical() {
        3
    } else {
        4
    }
}
