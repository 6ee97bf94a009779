//! Deterministic synthetic-corpus generation: a small seeded PRNG, Zipf rank
//! samplers (inverse-cdf for finite alphabets, rejection sampling for the
//! zeta limit), lazily generated Zipf token streams, and a planted-block
//! corpus builder used to construct inputs with known exact answers.

use std::collections::HashSet;
use std::sync::Arc;

use crate::corpus::CorpusSource;
use crate::error::{Error, Result};
use crate::hash::{hash_window, HashParams};
use crate::zipf::{Alphabet, ZipfModel};

/// Fixed width of a rank token in generated streams.
pub const TOKEN_LEN: usize = 8;

/// Largest finite alphabet for which an inverse-cdf table is built.
const MAX_CDF_TABLE: u64 = 10_000_000;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator. Small, seedable, and stable across releases, which
/// keeps every synthetic corpus and golden test byte-identical forever.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe to feed to negative powers.
    #[inline]
    fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [0, bound) without modulo bias worth caring about here.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    pub fn fill_bytes(&mut self, buf: &mut [u8]) {
        let mut chunks = buf.chunks_exact_mut(8);
        for chunk in &mut chunks {
            chunk.copy_from_slice(&self.next_u64().to_le_bytes());
        }
        let rest = chunks.into_remainder();
        if !rest.is_empty() {
            let word = self.next_u64().to_le_bytes();
            rest.copy_from_slice(&word[..rest.len()]);
        }
    }
}

/// SplitMix64's bijective finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Inverse of [`mix64`].
#[inline]
pub fn unmix64(mut z: u64) -> u64 {
    z = z ^ (z >> 31) ^ (z >> 62);
    z = z.wrapping_mul(0x3196_42B2_D24D_8EC3);
    z = z ^ (z >> 27) ^ (z >> 54);
    z = z.wrapping_mul(0x96DE_1B17_3F11_9089);
    z ^ (z >> 30) ^ (z >> 60)
}

/// Maps a rank to its fixed-width byte token. Bijective, so distinct ranks
/// always produce distinct tokens.
#[inline]
pub fn rank_token(rank: u64) -> [u8; TOKEN_LEN] {
    mix64(rank).to_be_bytes()
}

/// Recovers the rank a token was generated from.
pub fn token_rank(token: &[u8]) -> Option<u64> {
    let bytes: [u8; TOKEN_LEN] = token.try_into().ok()?;
    Some(unmix64(u64::from_be_bytes(bytes)))
}

/// Draws Zipf-distributed ranks.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    /// Inverse-cdf lookup over a precomputed cumulative table.
    Finite { cdf: Arc<Vec<f64>> },
    /// Rejection sampler for the zeta distribution (infinite alphabet).
    Infinite { order: f64 },
}

impl ZipfSampler {
    pub fn new(model: &ZipfModel) -> Result<Self> {
        match model.alphabet() {
            Alphabet::Finite(size) => {
                if size > MAX_CDF_TABLE {
                    return Err(Error::Config(format!(
                        "finite-alphabet sampler supports up to {MAX_CDF_TABLE} ranks, got {size}"
                    )));
                }
                let mut cdf = Vec::with_capacity(size as usize);
                let mut acc = 0.0f64;
                for rank in 1..=size {
                    acc += model.pmf(rank)?;
                    cdf.push(acc);
                }
                if let Some(last) = cdf.last_mut() {
                    *last = 1.0;
                }
                Ok(ZipfSampler {
                    kind: SamplerKind::Finite { cdf: Arc::new(cdf) },
                })
            }
            Alphabet::Infinite => Ok(ZipfSampler {
                kind: SamplerKind::Infinite {
                    order: model.exponent() + 1.0,
                },
            }),
        }
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> u64 {
        match &self.kind {
            SamplerKind::Finite { cdf } => {
                let u = rng.next_f64();
                let idx = cdf.partition_point(|&c| c < u);
                (idx as u64 + 1).min(cdf.len() as u64)
            }
            SamplerKind::Infinite { order } => {
                // Devroye's rejection method for the zeta distribution.
                let shape = order - 1.0;
                let b = 2f64.powf(shape);
                loop {
                    let u = rng.next_f64_open();
                    let v = rng.next_f64();
                    let x = u.powf(-1.0 / shape).floor();
                    if !(1.0..9.0e15).contains(&x) {
                        continue;
                    }
                    let t = (1.0 + 1.0 / x).powf(shape);
                    if v * x * (t - 1.0) / (b - 1.0) <= t / b {
                        return x as u64;
                    }
                }
            }
        }
    }
}

/// A corpus of Zipf-token documents, generated on demand. Both extraction
/// passes regenerate identical bytes, so a stream much larger than memory
/// never needs to be stored.
#[derive(Debug, Clone)]
pub struct ZipfCorpus {
    sampler: ZipfSampler,
    draws: u64,
    tokens_per_doc: u32,
    seed: u64,
}

impl ZipfCorpus {
    pub fn new(model: &ZipfModel, draws: u64, tokens_per_doc: u32, seed: u64) -> Result<Self> {
        if draws == 0 {
            return Err(Error::Config("draw count must be at least 1".into()));
        }
        if tokens_per_doc == 0 {
            return Err(Error::Config("tokens per document must be at least 1".into()));
        }
        Ok(ZipfCorpus {
            sampler: ZipfSampler::new(model)?,
            draws,
            tokens_per_doc,
            seed,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.draws.div_ceil(self.tokens_per_doc as u64) as usize
    }

    pub fn doc_tokens(&self, index: usize) -> u64 {
        let start = index as u64 * self.tokens_per_doc as u64;
        (self.draws - start).min(self.tokens_per_doc as u64)
    }

    pub fn doc_len(&self, index: usize) -> u64 {
        self.doc_tokens(index) * TOKEN_LEN as u64
    }

    pub fn doc_id(&self, index: usize) -> String {
        format!("zipf-{:016x}-{index:06}", self.seed)
    }

    pub fn doc_bytes(&self, index: usize) -> Vec<u8> {
        let tokens = self.doc_tokens(index);
        let mut rng = SplitMix64::new(mix64(self.seed ^ mix64(index as u64 + 1)));
        let mut bytes = Vec::with_capacity(tokens as usize * TOKEN_LEN);
        for _ in 0..tokens {
            let rank = self.sampler.sample(&mut rng);
            bytes.extend_from_slice(&rank_token(rank));
        }
        bytes
    }
}

/// Generates a seeded Zipf token stream laid out as documents of
/// `tokens_per_doc` tokens each (the last document may be shorter).
pub fn zipf_corpus(
    model: &ZipfModel,
    draws: u64,
    tokens_per_doc: u32,
    seed: u64,
) -> Result<CorpusSource> {
    Ok(CorpusSource::synthetic(ZipfCorpus::new(
        model,
        draws,
        tokens_per_doc,
        seed,
    )?))
}

/// [`zipf_corpus`] with the default layout of 4096 tokens per document.
pub fn sample_zipf_stream(model: &ZipfModel, draws: u64, seed: u64) -> Result<CorpusSource> {
    zipf_corpus(model, draws, 4096, seed)
}

/// A corpus with known planted n-grams and their exact target counts.
pub struct PlantedCorpus {
    pub corpus: CorpusSource,
    /// Planted blocks, aligned with `counts`.
    pub blocks: Vec<Vec<u8>>,
    pub counts: Vec<u64>,
}

/// Builds a corpus of `doc_count` documents containing `counts.len()`
/// distinct random blocks of `window_len` bytes, where block `i` occurs
/// exactly `counts[i]` times. Every block is chosen to pass the hash-stride
/// predicate `(h mod bucket_count) mod stride == 0` and to land in its own
/// bucket, so the planted blocks are exactly the frequent population the
/// extractor is supposed to find. Optional random separator bytes between
/// blocks keep windows that straddle block boundaries from repeating.
#[allow(clippy::too_many_arguments)]
pub fn planted_corpus(
    window_len: usize,
    counts: &[u64],
    stride: u64,
    bucket_count: u64,
    hash: &HashParams,
    doc_count: usize,
    separator_len: usize,
    seed: u64,
) -> Result<PlantedCorpus> {
    if counts.is_empty() || doc_count == 0 {
        return Err(Error::Config(
            "planted corpus needs at least one block and one document".into(),
        ));
    }
    if hash.window_len() != window_len {
        return Err(Error::Config(
            "hash parameters disagree with the planted window length".into(),
        ));
    }
    let mut rng = SplitMix64::new(mix64(seed ^ 0x706C_616E_7465_6464));

    let mut blocks: Vec<Vec<u8>> = Vec::with_capacity(counts.len());
    let mut used_buckets: HashSet<u64> = HashSet::new();
    let mut attempts = 0u64;
    let max_attempts = 100_000 * stride.max(1) * counts.len() as u64;
    while blocks.len() < counts.len() {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Config(
                "could not find enough stride-passing blocks; stride too large for the \
                 requested block count"
                    .into(),
            ));
        }
        let mut block = vec![0u8; window_len];
        rng.fill_bytes(&mut block);
        let bucket = hash_window(&block, hash)?.value() % bucket_count;
        if !bucket.is_multiple_of(stride) || !used_buckets.insert(bucket) {
            continue;
        }
        blocks.push(block);
    }

    // One entry per planted occurrence, shuffled.
    let total: u64 = counts.iter().sum();
    let mut schedule: Vec<u32> = Vec::with_capacity(total as usize);
    for (i, &c) in counts.iter().enumerate() {
        schedule.extend(std::iter::repeat_n(i as u32, c as usize));
    }
    for i in (1..schedule.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        schedule.swap(i, j);
    }

    let per_doc = schedule.len().div_ceil(doc_count);
    let mut docs: Vec<Vec<u8>> = Vec::with_capacity(doc_count);
    for chunk in schedule.chunks(per_doc.max(1)) {
        let mut doc = Vec::with_capacity(chunk.len() * (window_len + separator_len));
        for (pos, &block_id) in chunk.iter().enumerate() {
            if pos > 0 && separator_len > 0 {
                let mut sep = vec![0u8; separator_len];
                rng.fill_bytes(&mut sep);
                doc.extend_from_slice(&sep);
            }
            doc.extend_from_slice(&blocks[block_id as usize]);
        }
        docs.push(doc);
    }

    Ok(PlantedCorpus {
        corpus: CorpusSource::from_docs(docs),
        blocks,
        counts: counts.to_vec(),
    })
}
