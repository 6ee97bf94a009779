use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;

use kilogram::features::{FeatureMatrix, FeatureMode};
use kilogram::signatures::{generate_rule, RuleGenOptions, RuleMetrics};
use kilogram::tsv::read_topk_file;
use kilogram::{Error, Result};

use crate::commands::load_labels_file;
use crate::manifest::RunManifest;

#[derive(Args)]
pub struct YaraArgs {
    /// TSV of candidate n-grams (the features the matrix was built over).
    #[arg(long)]
    pub ngrams: PathBuf,
    /// Sparse feature matrix from `vectorize --format sparse`; its
    /// `.featmap.tsv` and `.docs.tsv` sidecars must sit next to it.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Labels file (`<path>\t<label>`), joined through the docs sidecar.
    /// Without it the labels embedded in the matrix rows are used.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// The label value the rule should detect.
    #[arg(long)]
    pub positive: String,
    /// Candidate pool size before filtering.
    #[arg(long = "max-candidates", default_value_t = 4000)]
    pub max_candidates: usize,
    /// Drop candidates present in more than this fraction of negative
    /// documents.
    #[arg(long = "max-fpr", default_value_t = 0.05)]
    pub max_fpr: f64,
    /// Rule name (Yara identifier).
    #[arg(long)]
    pub name: String,
    /// Optional provenance string embedded in the rule header comment.
    #[arg(long = "run-id")]
    pub run_id: Option<String>,
    /// Output `.yar` path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: YaraArgs, threads: Option<usize>) -> Result<()> {
    let sparse_text = read_text(&args.matrix)?;
    let featmap_path = sidecar_path(&args.matrix, "featmap.tsv");
    let featmap_text = read_text(&featmap_path)?;
    let mut matrix =
        FeatureMatrix::import_sparse(&sparse_text, &featmap_text, FeatureMode::Count)?;

    // Sanity: the matrix features must match the n-gram list it claims to be
    // built from.
    let tsv = read_topk_file(&args.ngrams)?;
    let from_tsv: Vec<Vec<u8>> = tsv.entries.into_iter().map(|e| e.gram).collect();
    if from_tsv != matrix.features() {
        return Err(Error::InvalidInput(format!(
            "{} does not list the same n-grams the matrix was vectorized over",
            args.ngrams.display()
        )));
    }

    if let Some(labels_path) = &args.labels {
        let by_path = load_labels_file(labels_path)?;
        let docs_path = sidecar_path(&args.matrix, "docs.tsv");
        let docs_text = read_text(&docs_path)?;
        let mut labels = Vec::new();
        for (lineno, line) in docs_text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (_, id) = line.split_once('\t').ok_or_else(|| {
                Error::format(&docs_path, format!("line {}: expected <row>\\t<path>", lineno + 1))
            })?;
            let label = by_path.get(id).ok_or_else(|| {
                Error::InvalidInput(format!("no label for document {id}"))
            })?;
            labels.push(label.clone());
        }
        matrix = matrix.with_labels(labels)?;
    }

    let start = Instant::now();
    let mut options = RuleGenOptions::new(&args.name);
    options.max_candidates = args.max_candidates;
    options.max_fpr = args.max_fpr;
    options.source_run = args.run_id.clone();
    let rule = generate_rule(&matrix, &args.positive, None, &options)?;
    let elapsed = start.elapsed();

    std::fs::write(&args.out, rule.to_yara()).map_err(|e| Error::io(&args.out, e))?;

    let train = train_metrics(&rule, &matrix, &args.positive)?;
    println!(
        "rule {}: {} patterns | train precision {:.4} recall {:.4} F1 {:.4} FPR {:.6}",
        rule.name(),
        rule.patterns().len(),
        train.precision,
        train.recall,
        train.f1,
        train.fpr
    );

    let mut manifest = RunManifest::new("yara", threads);
    manifest.record_output(&args.out);
    manifest.record_timing("generate", elapsed.as_millis());
    manifest.record_stat("patterns", rule.patterns().len());
    manifest.record_stat("train_f1", train.f1);
    manifest.record_stat("train_fpr", train.fpr);
    manifest.record_stat("positive", args.positive.clone());
    manifest.write_next_to(&args.out)?;
    eprintln!("yara: {} -> {}", rule.name(), args.out.display());
    Ok(())
}

/// Training metrics straight from the matrix: the rule fires on a row iff
/// any of its patterns is a present feature.
fn train_metrics(
    rule: &kilogram::SignatureRule,
    matrix: &FeatureMatrix,
    positive: &str,
) -> Result<RuleMetrics> {
    let labels = matrix
        .labels()
        .ok_or_else(|| Error::InvalidInput("matrix has no labels".into()))?;
    let index: HashMap<&[u8], usize> = matrix
        .features()
        .iter()
        .enumerate()
        .map(|(i, f)| (f.as_slice(), i))
        .collect();
    let pattern_ids: Vec<usize> = rule
        .patterns()
        .iter()
        .filter_map(|p| index.get(p.as_slice()).copied())
        .collect();
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (row, label) in matrix.rows().iter().zip(labels) {
        let fired = row
            .iter()
            .any(|&(idx, _)| pattern_ids.contains(&(idx as usize)));
        match (fired, label == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    RuleMetrics::from_counts(tp, fp, tn, fn_)
}

fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".to_string());
    name.push('.');
    name.push_str(suffix);
    out.with_file_name(name)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
