use std::path::PathBuf;

use clap::Args;

use kilogram::pipeline::run_kilograms;
use kilogram::{Error, Result};

use crate::commands::{build_config, corpus_from_input};

/// Desk-friendly default table size for timing runs: a prime near 2^26
/// (256 MB of counters) instead of the 8.6 GB production default.
const BENCH_TABLE_SIZE: u64 = 67_108_859;

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated n values, e.g. `8,16,32,64,128,256,512,1024`.
    #[arg(long = "n-list", value_delimiter = ',')]
    pub n_list: Vec<usize>,
    /// Corpus directory or list file.
    #[arg(long)]
    pub input: PathBuf,
    /// Top-k per run.
    #[arg(long, default_value_t = 1000)]
    pub k: usize,
    /// Bucket table size (default: a prime near 2^26).
    #[arg(long = "table-size", default_value_t = BENCH_TABLE_SIZE)]
    pub table_size: u64,
}

pub fn run(args: BenchArgs) -> Result<()> {
    if args.n_list.is_empty() {
        return Err(Error::InvalidInput("--n-list is empty".into()));
    }
    let corpus = corpus_from_input(&args.input)?;
    if corpus.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no documents under {}",
            args.input.display()
        )));
    }
    println!("n\tstride\tpass1_ms\tpass2_ms\ttotal_ms\tL\tentries");
    for &n in &args.n_list {
        let cfg = build_config(n, args.k, None, Some(args.table_size), None, None)?;
        let result = run_kilograms(&corpus, &cfg)?;
        println!(
            "{n}\t{}\t{}\t{}\t{}\t{}\t{}",
            cfg.stride(),
            result.timings.pass1.as_millis(),
            result.timings.pass2.as_millis(),
            (result.timings.pass1 + result.timings.pass2).as_millis(),
            result.total_processed,
            result.entries.len()
        );
    }
    Ok(())
}
