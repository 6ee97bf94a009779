use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};

use kilogram::features::{vectorize, FeatureMode};
use kilogram::tsv::read_topk_file;
use kilogram::{Error, Result};

use crate::commands::{corpus_from_input, load_labels_file};
use crate::manifest::RunManifest;

#[derive(Args)]
pub struct VectorizeArgs {
    /// TSV of n-grams to use as features (output of `topk` or `oracle`).
    #[arg(long)]
    pub ngrams: PathBuf,
    /// Corpus directory or list file.
    #[arg(long)]
    pub input: PathBuf,
    /// Count or binary features.
    #[arg(long, value_enum, default_value_t = Mode::Count)]
    pub mode: Mode,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Sparse)]
    pub format: Format,
    /// Optional labels file (`<path>\t<label>` per line) keyed by document
    /// path as listed in the corpus.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output path. Sparse format also writes `<out>.featmap.tsv` and
    /// `<out>.docs.tsv` sidecars.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Mode {
    Count,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    /// `label idx:val ...` rows plus feature-map and doc-list sidecars.
    Sparse,
    /// Dense CSV with a hex n-gram header.
    Csv,
}

pub fn run(args: VectorizeArgs, threads: Option<usize>) -> Result<()> {
    let tsv = read_topk_file(&args.ngrams)?;
    let features: Vec<Vec<u8>> = tsv.entries.into_iter().map(|e| e.gram).collect();
    if features.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} holds no n-grams",
            args.ngrams.display()
        )));
    }
    let corpus = corpus_from_input(&args.input)?;
    let mode = match args.mode {
        Mode::Count => FeatureMode::Count,
        Mode::Binary => FeatureMode::Binary,
    };
    let start = Instant::now();
    let mut matrix = vectorize(&corpus, &features, mode)?;
    if let Some(labels_path) = &args.labels {
        let by_id = load_labels_file(labels_path)?;
        matrix = matrix.with_labels_by_id(&by_id)?;
    }
    let elapsed = start.elapsed();

    let mut outputs = vec![args.out.clone()];
    match args.format {
        Format::Sparse => {
            write_with(&args.out, |w| matrix.export_sparse(w))?;
            let featmap = sidecar(&args.out, "featmap.tsv");
            write_with(&featmap, |w| matrix.write_feature_map(w))?;
            let docs = sidecar(&args.out, "docs.tsv");
            write_with(&docs, |w| {
                for (i, id) in matrix.doc_ids().iter().enumerate() {
                    writeln!(w, "{i}\t{id}")?;
                }
                Ok(())
            })?;
            outputs.push(featmap);
            outputs.push(docs);
        }
        Format::Csv => {
            write_with(&args.out, |w| matrix.export_delimited(w))?;
        }
    }

    let mut manifest = RunManifest::new("vectorize", threads);
    manifest.digest_corpus(&corpus)?;
    for out in &outputs {
        manifest.record_output(out);
    }
    manifest.record_timing("vectorize", elapsed.as_millis());
    manifest.record_stat("features", features.len());
    manifest.record_stat("documents", matrix.doc_count());
    manifest.record_stat(
        "nonzeros",
        matrix.rows().iter().map(|r| r.len() as u64).sum::<u64>(),
    );
    manifest.write_next_to(&args.out)?;

    eprintln!(
        "vectorize: {} docs x {} features ({:.2?}) -> {}",
        matrix.doc_count(),
        features.len(),
        elapsed,
        args.out.display()
    );
    Ok(())
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".to_string());
    name.push('.');
    name.push_str(suffix);
    out.with_file_name(name)
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
