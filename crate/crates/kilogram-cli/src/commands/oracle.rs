use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use kilogram::oracle::exact_topk;
use kilogram::tsv::write_topk_file;
use kilogram::{Error, Result};

use crate::commands::{build_config, corpus_from_input};
use crate::manifest::RunManifest;

#[derive(Args)]
pub struct OracleArgs {
    /// N-gram length in bytes.
    #[arg(long)]
    pub n: usize,
    /// How many n-grams to report.
    #[arg(long)]
    pub k: usize,
    /// Hash-stride (default: ceil(n/4)); must match the run being checked.
    #[arg(long)]
    pub stride: Option<u64>,
    /// Bucket count used for the stride predicate (default 2147483629).
    #[arg(long = "table-size")]
    pub table_size: Option<u64>,
    /// Echoed into the output header so files diff cleanly against topk runs.
    #[arg(long = "ss-capacity")]
    pub ss_capacity: Option<usize>,
    /// Rolling-hash multiplier override.
    #[arg(long)]
    pub multiplier: Option<u64>,
    /// Corpus directory or list file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output TSV path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: OracleArgs, threads: Option<usize>) -> Result<()> {
    let cfg = build_config(
        args.n,
        args.k,
        args.stride,
        args.table_size,
        args.ss_capacity,
        args.multiplier,
    )?;
    let corpus = corpus_from_input(&args.input)?;
    if corpus.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no documents under {}",
            args.input.display()
        )));
    }
    let start = Instant::now();
    let result = exact_topk(&corpus, &cfg, cfg.top_k())?;
    let elapsed = start.elapsed();
    write_topk_file(&args.out, &cfg, result.total_processed, &result.entries)?;

    let mut manifest = RunManifest::new("oracle", threads);
    manifest.set_config(&cfg);
    manifest.digest_corpus(&corpus)?;
    manifest.record_output(&args.out);
    manifest.record_timing("exact", elapsed.as_millis());
    manifest.record_stat("total_processed", result.total_processed);
    manifest.record_stat("entries", result.entries.len());
    manifest.write_next_to(&args.out)?;

    eprintln!(
        "oracle: {} entries, L={}, {:.2?} -> {}",
        result.entries.len(),
        result.total_processed,
        elapsed,
        args.out.display()
    );
    Ok(())
}
