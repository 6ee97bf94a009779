//! Shared corpus builders for the benchmark targets.

use kilogram::synth::{mix64, SplitMix64};
use kilogram::CorpusSource;

/// Seeded random corpus of `docs` documents, `doc_len` bytes each.
pub fn random_corpus(docs: usize, doc_len: usize, seed: u64) -> CorpusSource {
    let documents = (0..docs)
        .map(|i| {
            let mut rng = SplitMix64::new(mix64(seed ^ i as u64));
            let mut doc = vec![0u8; doc_len];
            rng.fill_bytes(&mut doc);
            doc
        })
        .collect();
    CorpusSource::from_docs(documents)
}

/// One seeded random buffer.
pub fn random_bytes(len: usize, seed: u64) -> Vec<u8> {
    let mut rng = SplitMix64::new(seed);
    let mut buf = vec![0u8; len];
    rng.fill_bytes(&mut buf);
    buf
}
