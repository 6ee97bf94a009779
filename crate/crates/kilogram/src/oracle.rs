//! Brute-force ground truth for desk-scale verification: exact strided
//! n-gram counting with the same hash-stride predicate the pipeline applies,
//! plus the spatial-stride strawman it is meant to beat. Single-threaded on
//! purpose; this is the trusted reference, not the fast path.

use std::collections::HashMap;

use crate::config::ExtractionConfig;
use crate::corpus::{CorpusSource, DocBytes};
use crate::error::{Error, Result};
use crate::hashgram::scan_stride_passing;
use crate::pipeline::RankedGram;

/// Exact counting refuses corpora with more windows than this.
pub const EXACT_WINDOW_GUARD: u64 = 100_000_000;

#[derive(Debug)]
pub struct OracleResult {
    /// Exact top-k under the same ranking and tie-break as the pipeline.
    pub entries: Vec<RankedGram>,
    /// Stride-passing windows counted (the oracle's view of L).
    pub total_processed: u64,
}

/// Enumerates every window of every document, applies the hash-stride
/// predicate `(h(g) mod B) mod s == 0`, counts exactly, and returns the top-k
/// by count (descending, ties to the lexicographically smaller gram).
///
/// `k` is taken separately from the config so that `k = 0` (empty answer) is
/// expressible.
pub fn exact_topk(corpus: &CorpusSource, cfg: &ExtractionConfig, k: usize) -> Result<OracleResult> {
    let n = cfg.window_len();
    check_window_guard(corpus, n)?;
    let docs = read_all(corpus)?;

    let bucket_count = cfg.bucket_count();
    let stride = cfg.stride();
    let mut counts: HashMap<&[u8], u64> = HashMap::new();
    let mut total = 0u64;
    for doc in &docs {
        scan_stride_passing(doc, cfg.hash(), bucket_count, stride, |offset, _| {
            *counts.entry(&doc[offset..offset + n]).or_insert(0) += 1;
            total += 1;
        });
    }
    Ok(OracleResult {
        entries: rank(counts, k),
        total_processed: total,
    })
}

/// Strawman baseline: samples only the windows at offsets that are multiples
/// of `spatial_stride` within each document and counts those. Occurrences at
/// other offsets are invisible to it, which is exactly its weakness.
pub fn spatial_stride_topk(
    corpus: &CorpusSource,
    window_len: usize,
    k: usize,
    spatial_stride: usize,
) -> Result<Vec<(Vec<u8>, u64)>> {
    if window_len == 0 || spatial_stride == 0 {
        return Err(Error::InvalidInput(
            "window length and spatial stride must be at least 1".into(),
        ));
    }
    check_window_guard(corpus, window_len)?;
    let docs = read_all(corpus)?;
    let mut counts: HashMap<&[u8], u64> = HashMap::new();
    for doc in &docs {
        let mut offset = 0;
        while offset + window_len <= doc.len() {
            *counts.entry(&doc[offset..offset + window_len]).or_insert(0) += 1;
            offset += spatial_stride;
        }
    }
    Ok(rank(counts, k)
        .into_iter()
        .map(|e| (e.gram, e.count))
        .collect())
}

/// Exact overlapping-occurrence count of one n-gram across the whole corpus.
pub fn exact_count(corpus: &CorpusSource, gram: &[u8]) -> Result<u64> {
    if gram.is_empty() {
        return Err(Error::InvalidInput("n-gram must be nonempty".into()));
    }
    let mut total = 0u64;
    for i in 0..corpus.doc_count() {
        let doc = corpus.read_doc(i)?;
        if doc.len() >= gram.len() {
            total += doc.windows(gram.len()).filter(|w| *w == gram).count() as u64;
        }
    }
    Ok(total)
}

fn check_window_guard(corpus: &CorpusSource, window_len: usize) -> Result<()> {
    let mut windows = 0u64;
    for i in 0..corpus.doc_count() {
        let len = corpus.doc_len(i)?;
        windows += len.saturating_sub(window_len as u64 - 1);
        if windows > EXACT_WINDOW_GUARD {
            return Err(Error::OracleGuard {
                windows,
                limit: EXACT_WINDOW_GUARD,
            });
        }
    }
    Ok(())
}

fn read_all(corpus: &CorpusSource) -> Result<Vec<DocBytes>> {
    (0..corpus.doc_count()).map(|i| corpus.read_doc(i)).collect()
}

fn rank(counts: HashMap<&[u8], u64>, k: usize) -> Vec<RankedGram> {
    let mut ranked: Vec<(&[u8], u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(k);
    ranked
        .into_iter()
        .map(|(gram, count)| RankedGram {
            gram: gram.to_vec(),
            count,
            error: 0,
        })
        .collect()
}
