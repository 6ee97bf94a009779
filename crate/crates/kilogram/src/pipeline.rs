//! End-to-end two-pass extraction: tabulate hashed buckets, quickselect the
//! top-k buckets into a whitelist, then re-stream the corpus offering only
//! whitelisted n-grams to a Space-Saving summary. Total work is linear in the
//! corpus; memory is the bucket table plus k-scale exact n-gram storage.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::ExtractionConfig;
use crate::corpus::CorpusSource;
use crate::error::{Error, Result};
use crate::hashgram::{scan_stride_passing, tabulate, IngestReport, TopKHashSet};
use crate::space_saving::SpaceSavingSummary;

/// One extracted n-gram with its guaranteed count bounds: the true strided
/// occurrence count lies in `[count - error, count]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedGram {
    pub gram: Vec<u8>,
    pub count: u64,
    pub error: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PassTimings {
    /// Tabulation plus bucket quickselect.
    pub pass1: Duration,
    /// Whitelisted Space-Saving pass plus merges.
    pub pass2: Duration,
}

/// Final result of a two-pass run.
#[derive(Debug)]
pub struct TopKResult {
    pub config: ExtractionConfig,
    /// Top-k n-grams, count descending, ties by lexicographically smaller
    /// gram. Fewer than k entries when the corpus holds fewer distinct
    /// stride-passing n-grams.
    pub entries: Vec<RankedGram>,
    pub timings: PassTimings,
    /// Stride-passing n-grams observed in pass 1.
    pub total_processed: u64,
    /// N-grams offered to the summary in pass 2 (whitelisted occurrences).
    pub whitelist_insertions: u64,
    /// Whitelisted insertions not attributable to the returned top-k: the
    /// observable cost of hash collisions, to be compared against the
    /// expected-collision budget.
    pub collision_surplus: u64,
    pub report: IngestReport,
}

#[derive(Debug)]
pub struct SecondPassOutput {
    pub summary: SpaceSavingSummary,
    pub insertions: u64,
}

/// Runs both passes and returns the ranked top-k n-grams.
pub fn run_kilograms(corpus: &CorpusSource, cfg: &ExtractionConfig) -> Result<TopKResult> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("corpus has no documents".into()));
    }
    let start = Instant::now();
    let (table, report) = tabulate(corpus, cfg)?;
    let total_processed = table.total_processed();
    let whitelist = table.select_topk(cfg.top_k());
    drop(table); // release the bucket table before the second pass
    let pass1 = start.elapsed();

    let start = Instant::now();
    let second = if whitelist.is_empty() {
        SecondPassOutput {
            summary: SpaceSavingSummary::new(cfg.window_len(), cfg.summary_capacity())?,
            insertions: 0,
        }
    } else {
        second_pass(corpus, cfg, &whitelist, &report.doc_lengths)?
    };
    let pass2 = start.elapsed();

    let entries: Vec<RankedGram> = second
        .summary
        .top_entries(cfg.top_k())
        .into_iter()
        .map(|(gram, count, error)| RankedGram { gram, count, error })
        .collect();
    debug_assert!(entries.iter().all(|e| {
        let bucket = crate::hash::hash_window(&e.gram, cfg.hash()).unwrap().value()
            % cfg.bucket_count();
        whitelist.contains(bucket)
    }));
    let top_counts: u64 = entries.iter().map(|e| e.count).sum();
    Ok(TopKResult {
        config: cfg.clone(),
        entries,
        timings: PassTimings { pass1, pass2 },
        total_processed,
        whitelist_insertions: second.insertions,
        collision_surplus: second.insertions.saturating_sub(top_counts),
        report,
    })
}

/// Second pass: stream the corpus again and offer every n-gram whose bucket
/// is whitelisted. The stride check is not reapplied; buckets off the stride
/// lattice hold count zero in pass 1 and can never be selected.
///
/// `pass1_lengths` are the per-document byte lengths recorded in pass 1
/// (`None` for documents that failed then and stay skipped); any length
/// change is reported as a two-pass consistency error.
///
/// Documents are processed in fixed chunks, one summary per chunk, merged in
/// chunk order, so the result does not depend on the worker count.
#[allow(clippy::needless_range_loop)] // the index also names documents for error reporting
pub fn second_pass(
    corpus: &CorpusSource,
    cfg: &ExtractionConfig,
    whitelist: &TopKHashSet,
    pass1_lengths: &[Option<u64>],
) -> Result<SecondPassOutput> {
    if pass1_lengths.len() != corpus.doc_count() {
        return Err(Error::CorpusChanged(format!(
            "document count changed from {} to {}",
            pass1_lengths.len(),
            corpus.doc_count()
        )));
    }
    let n = cfg.window_len();
    // Every whitelisted bucket lies on the stride lattice: off-lattice
    // buckets hold count zero in pass 1 and can never be selected, so the
    // scan only probes membership for stride-passing windows.
    debug_assert!(whitelist
        .indices()
        .iter()
        .all(|&b| (b as u64).is_multiple_of(cfg.stride())));

    let doc_count = corpus.doc_count();
    let chunk_size = doc_count.div_ceil(64).max(1);
    let chunk_count = doc_count.div_ceil(chunk_size);
    let chunk_results: Vec<Result<SpaceSavingSummary>> = (0..chunk_count)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * chunk_size;
            let hi = (lo + chunk_size).min(doc_count);
            let mut summary = SpaceSavingSummary::new(n, cfg.summary_capacity())?;
            let mut hits: Vec<usize> = Vec::new();
            for i in lo..hi {
                let expected = match pass1_lengths[i] {
                    Some(len) => len,
                    None => continue, // unreadable in pass 1, stays skipped
                };
                let doc = corpus.read_doc(i).map_err(|e| {
                    Error::CorpusChanged(format!(
                        "document {} became unreadable: {e}",
                        corpus.doc_id(i)
                    ))
                })?;
                if doc.len() as u64 != expected {
                    return Err(Error::CorpusChanged(format!(
                        "document {} changed length: {} -> {}",
                        corpus.doc_id(i),
                        expected,
                        doc.len()
                    )));
                }
                collect_whitelisted(&doc, cfg, whitelist, &mut hits);
                for &offset in &hits {
                    summary.offer(&doc[offset..offset + n])?;
                }
            }
            Ok(summary)
        })
        .collect();

    let mut layer = Vec::with_capacity(chunk_results.len());
    for result in chunk_results {
        layer.push(result?);
    }
    // Balanced pairwise reduction in fixed chunk order: deterministic for
    // any worker count, and each stored n-gram moves O(log chunks) times
    // instead of O(chunks).
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut iter = layer.into_iter();
        while let Some(left) = iter.next() {
            match iter.next() {
                Some(right) => next.push(left.merge_owned(right)?),
                None => next.push(left),
            }
        }
        layer = next;
    }
    let merged = match layer.pop() {
        Some(summary) => summary,
        None => SpaceSavingSummary::new(n, cfg.summary_capacity())?,
    };
    let insertions = merged.inserted_total();
    Ok(SecondPassOutput {
        summary: merged,
        insertions,
    })
}

/// Collects the offsets of whitelisted windows in one document. Kept out of
/// line so the window scan compiles in its own small frame; inlined into the
/// fallible chunk loop it picks up enough live state to slow the hot path
/// measurably.
#[inline(never)]
fn collect_whitelisted(
    doc: &[u8],
    cfg: &ExtractionConfig,
    whitelist: &TopKHashSet,
    hits: &mut Vec<usize>,
) {
    hits.clear();
    let bucket_count = cfg.bucket_count();
    let stride = cfg.stride();
    scan_stride_passing(doc, cfg.hash(), bucket_count, stride, |offset, bucket| {
        if whitelist.contains(bucket) {
            hits.push(offset);
        }
    });
}
