use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use kilogram::hashgram::{tabulate, HashGramTable, IngestReport};
use kilogram::pipeline::{second_pass, RankedGram};
use kilogram::space_saving::SpaceSavingSummary;
use kilogram::tsv::write_topk_file;
use kilogram::{Error, Result};

use crate::commands::{build_config, corpus_from_input};
use crate::manifest::RunManifest;

#[derive(Args)]
pub struct TopkArgs {
    /// N-gram length in bytes.
    #[arg(long)]
    pub n: usize,
    /// How many frequent n-grams to keep.
    #[arg(long)]
    pub k: usize,
    /// Hash-stride (default: ceil(n/4)).
    #[arg(long)]
    pub stride: Option<u64>,
    /// Pass-1 bucket table size (default 2147483629; at 4 bytes per bucket
    /// the default needs ~8.6 GB of RAM, override downward on desk machines).
    #[arg(long = "table-size")]
    pub table_size: Option<u64>,
    /// Space-Saving capacity (default max(k+300000, 3k)).
    #[arg(long = "ss-capacity")]
    pub ss_capacity: Option<usize>,
    /// Rolling-hash multiplier override.
    #[arg(long)]
    pub multiplier: Option<u64>,
    /// Corpus directory or list file (one path per line).
    #[arg(long)]
    pub input: PathBuf,
    /// Output TSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Spill the pass-1 table here after tabulation (resumable runs).
    #[arg(long = "save-table")]
    pub save_table: Option<PathBuf>,
    /// Resume from a previously spilled pass-1 table, skipping pass 1.
    /// The corpus must be unchanged since the table was written.
    #[arg(long = "load-table", conflicts_with = "save_table")]
    pub load_table: Option<PathBuf>,
}

pub fn run(args: TopkArgs, threads: Option<usize>) -> Result<()> {
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

    let pass1_start = Instant::now();
    let (table, report) = match &args.load_table {
        None => tabulate(&corpus, &cfg)?,
        Some(path) => {
            let table = HashGramTable::load(path)?;
            if table.bucket_count() != cfg.bucket_count()
                || table.window_len() as usize != cfg.window_len()
                || table.stride() != cfg.stride() as u32
            {
                return Err(Error::Config(format!(
                    "loaded table (B={}, n={}, s={}) disagrees with the requested configuration",
                    table.bucket_count(),
                    table.window_len(),
                    table.stride()
                )));
            }
            // The spilled table carries no per-document lengths; re-derive
            // them from the current corpus for the pass-2 consistency check.
            let mut report = IngestReport::default();
            for i in 0..corpus.doc_count() {
                report.doc_lengths.push(corpus.doc_len(i).ok());
            }
            (table, report)
        }
    };
    if let Some(path) = &args.save_table {
        table.spill(path)?;
    }
    for (doc, err) in &report.failures {
        eprintln!("warning: skipped document {}: {err}", corpus.doc_id(*doc));
    }
    let total_processed = table.total_processed();
    let whitelist = table.select_topk(cfg.top_k());
    drop(table);
    let pass1 = pass1_start.elapsed();

    let pass2_start = Instant::now();
    let second = if whitelist.is_empty() {
        kilogram::pipeline::SecondPassOutput {
            summary: SpaceSavingSummary::new(cfg.window_len(), cfg.summary_capacity())?,
            insertions: 0,
        }
    } else {
        second_pass(&corpus, &cfg, &whitelist, &report.doc_lengths)?
    };
    let pass2 = pass2_start.elapsed();

    let entries: Vec<RankedGram> = second
        .summary
        .top_entries(cfg.top_k())
        .into_iter()
        .map(|(gram, count, error)| RankedGram { gram, count, error })
        .collect();
    write_topk_file(&args.out, &cfg, total_processed, &entries)?;

    let top_counts: u64 = entries.iter().map(|e| e.count).sum();
    let mut manifest = RunManifest::new("topk", threads);
    manifest.set_config(&cfg);
    manifest.digest_corpus(&corpus)?;
    manifest.record_output(&args.out);
    manifest.record_timing("pass1", pass1.as_millis());
    manifest.record_timing("pass2", pass2.as_millis());
    manifest.record_stat("total_processed", total_processed);
    manifest.record_stat("whitelist_insertions", second.insertions);
    manifest.record_stat(
        "collision_surplus",
        second.insertions.saturating_sub(top_counts),
    );
    manifest.record_stat("entries", entries.len());
    manifest.record_stat("docs_skipped", report.failures.len());
    manifest.write_next_to(&args.out)?;

    eprintln!(
        "topk: {} entries, L={total_processed}, pass1 {:.2?}, pass2 {:.2?} -> {}",
        entries.len(),
        pass1,
        pass2,
        args.out.display()
    );
    Ok(())
}
