use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use kilogram::synth::zipf_corpus;
use kilogram::zipf::{Alphabet, ZipfModel};
use kilogram::{Error, Result};

use crate::commands::parse_magnitude;
use crate::manifest::RunManifest;

#[derive(Args)]
pub struct ZipfArgs {
    /// Zipf exponent p (the pmf decays as rank^-(p+1)).
    #[arg(long)]
    pub p: f64,
    /// Alphabet size (number of distinct ranks); 0 means infinite
    /// (zeta-distribution limit, requires p > 0).
    #[arg(long)]
    pub alphabet: u64,
    /// Number of token draws, e.g. `1e6`.
    #[arg(long)]
    pub length: String,
    /// Generator seed; identical seeds reproduce identical corpora.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tokens per document file.
    #[arg(long = "doc-tokens", default_value_t = 4096)]
    pub doc_tokens: u32,
    /// Output directory for `doc-NNNNNN.bin` files.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: ZipfArgs, threads: Option<usize>) -> Result<()> {
    let draws = parse_magnitude(&args.length)?;
    let alphabet = if args.alphabet == 0 {
        Alphabet::Infinite
    } else {
        Alphabet::Finite(args.alphabet)
    };
    let model = ZipfModel::new(args.p, alphabet)?;
    let corpus = zipf_corpus(&model, draws, args.doc_tokens, args.seed)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let start = Instant::now();
    let mut bytes = 0u64;
    for i in 0..corpus.doc_count() {
        let doc = corpus.read_doc(i)?;
        bytes += doc.len() as u64;
        let path = args.out.join(format!("doc-{i:06}.bin"));
        std::fs::write(&path, &*doc).map_err(|e| Error::io(&path, e))?;
    }
    let elapsed = start.elapsed();

    let mut manifest = RunManifest::new("zipf", threads);
    manifest.record_output(&args.out);
    manifest.record_timing("generate", elapsed.as_millis());
    manifest.record_stat("draws", draws);
    manifest.record_stat("documents", corpus.doc_count());
    manifest.record_stat("bytes", bytes);
    manifest.record_stat("seed", args.seed);
    manifest.record_stat("exponent", args.p);
    manifest.record_stat("alphabet", args.alphabet);
    // Next to the directory, not inside it: the corpus directory must hold
    // only documents.
    manifest.write_next_to(&args.out)?;

    eprintln!(
        "zipf: {} docs, {bytes} bytes ({:.2?}) -> {}",
        corpus.doc_count(),
        elapsed,
        args.out.display()
    );
    Ok(())
}
