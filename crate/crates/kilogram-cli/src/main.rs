//! `kilogram` command-line tool: batch top-k n-gram extraction, exact-oracle
//! runs, feature vectorization, Yara rule generation, synthetic corpus
//! generation, collision-bound evaluation, and per-n timing reports.

mod commands;
mod manifest;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

#[derive(Parser)]
#[command(
    name = "kilogram",
    version,
    about = "Top-k frequent byte n-gram extraction for very large n, with feature export and Yara rule generation"
)]
struct Cli {
    /// Worker threads (default: all hardware threads). Results are identical
    /// for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-pass top-k n-gram extraction over a corpus.
    Topk(commands::topk::TopkArgs),
    /// Exact brute-force top-k (desk-scale reference; same output format).
    Oracle(commands::oracle::OracleArgs),
    /// Per-document feature vectors over previously extracted n-grams.
    Vectorize(commands::vectorize::VectorizeArgs),
    /// Generate a Yara rule from a labeled feature matrix.
    Yara(commands::yara::YaraArgs),
    /// Generate a synthetic Zipf-token corpus.
    Zipf(commands::zipf::ZipfArgs),
    /// Print collision-budget bounds for given stream parameters.
    Bound(commands::bound::BoundArgs),
    /// Time both passes across a list of n values.
    Bench(commands::bench::BenchArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            std::process::exit(EXIT_USAGE);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} threads: {e}");
            std::process::exit(EXIT_USAGE);
        }
    }
    let result = match cli.command {
        Command::Topk(args) => commands::topk::run(args, cli.threads),
        Command::Oracle(args) => commands::oracle::run(args, cli.threads),
        Command::Vectorize(args) => commands::vectorize::run(args, cli.threads),
        Command::Yara(args) => commands::yara::run(args, cli.threads),
        Command::Zipf(args) => commands::zipf::run(args, cli.threads),
        Command::Bound(args) => commands::bound::run(args),
        Command::Bench(args) => commands::bench::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn exit_code(e: &kilogram::Error) -> i32 {
    use kilogram::Error;
    match e {
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        Error::CorpusChanged(_) => EXIT_CONSISTENCY,
        Error::OracleGuard { .. } => EXIT_GUARD,
        _ => EXIT_USAGE,
    }
}
