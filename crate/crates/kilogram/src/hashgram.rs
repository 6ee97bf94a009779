//! First extraction pass: count hashed n-gram buckets (collisions accepted)
//! under the hash-stride filter, then pick the top-k buckets by quickselect.
//!
//! The table holds one saturating 32-bit counter per bucket and is shared by
//! all worker threads; increments are atomic and commute, so the populated
//! table is identical for any thread count.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rayon::prelude::*;

use crate::config::ExtractionConfig;
use crate::corpus::CorpusSource;
use crate::error::{Error, Result};


const SPILL_MAGIC: [u8; 4] = *b"KGT1";
const SPILL_VERSION: u32 = 1;

/// Bucket-count table for pass 1: `bucket_count` saturating u32 counters plus
/// the running total of stride-passing n-grams observed.
pub struct HashGramTable {
    counts: Box<[AtomicU32]>,
    bucket_count: u64,
    window_len: u32,
    stride: u32,
    total_processed: AtomicU64,
}

impl HashGramTable {
    pub fn new(bucket_count: u64, window_len: u32, stride: u32) -> Result<Self> {
        if bucket_count == 0 || window_len == 0 || stride == 0 {
            return Err(Error::Config(
                "bucket count, window length, and stride must all be at least 1".into(),
            ));
        }
        let mut counts = Vec::new();
        counts.resize_with(bucket_count as usize, || AtomicU32::new(0));
        Ok(HashGramTable {
            counts: counts.into_boxed_slice(),
            bucket_count,
            window_len,
            stride,
            total_processed: AtomicU64::new(0),
        })
    }

    pub fn bucket_count(&self) -> u64 {
        self.bucket_count
    }

    pub fn window_len(&self) -> u32 {
        self.window_len
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    /// Count of stride-passing n-grams recorded so far.
    pub fn total_processed(&self) -> u64 {
        self.total_processed.load(Ordering::Relaxed)
    }

    #[inline]
    pub fn increment(&self, bucket: u64) {
        saturating_increment(&self.counts[bucket as usize]);
    }

    pub fn add_processed(&self, n: u64) {
        self.total_processed.fetch_add(n, Ordering::Relaxed);
    }

    pub fn count(&self, bucket: u64) -> u32 {
        self.counts[bucket as usize].load(Ordering::Relaxed)
    }

    /// Sum of all counters. Equals `total_processed` unless a counter has
    /// saturated.
    pub fn sum_counts(&self) -> u64 {
        self.counts
            .iter()
            .map(|c| c.load(Ordering::Relaxed) as u64)
            .sum()
    }

    /// Indices of the `k` largest nonzero counters. Ties at the selection
    /// threshold go to the smaller bucket index; fewer than `k` nonzero
    /// buckets returns them all.
    pub fn select_topk(&self, k: usize) -> TopKHashSet {
        let mut candidates: Vec<(u32, u32)> = Vec::new();
        // Only stride-aligned buckets can be nonzero.
        let mut bucket = 0u64;
        while bucket < self.bucket_count {
            let count = self.counts[bucket as usize].load(Ordering::Relaxed);
            if count > 0 {
                candidates.push((count, bucket as u32));
            }
            bucket += self.stride as u64;
        }
        let order = |a: &(u32, u32), b: &(u32, u32)| b.0.cmp(&a.0).then(a.1.cmp(&b.1));
        if k == 0 {
            candidates.clear();
        } else if candidates.len() > k {
            candidates.select_nth_unstable_by(k - 1, order);
            candidates.truncate(k);
        }
        candidates.sort_unstable_by(order);
        let threshold = candidates.last().map(|&(c, _)| c).unwrap_or(0);
        let mut indices: Vec<u32> = candidates.into_iter().map(|(_, i)| i).collect();
        indices.sort_unstable();
        TopKHashSet::new(indices, threshold)
    }

    /// Writes the table as a 32-byte header (magic, version, bucket count,
    /// window length, stride, total processed) followed by the raw
    /// little-endian u32 counters.
    pub fn spill(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let write = |w: &mut BufWriter<File>, bytes: &[u8]| {
            w.write_all(bytes).map_err(|e| Error::io(path, e))
        };
        write(&mut w, &SPILL_MAGIC)?;
        write(&mut w, &SPILL_VERSION.to_le_bytes())?;
        write(&mut w, &self.bucket_count.to_le_bytes())?;
        write(&mut w, &self.window_len.to_le_bytes())?;
        write(&mut w, &self.stride.to_le_bytes())?;
        write(&mut w, &self.total_processed().to_le_bytes())?;
        for c in self.counts.iter() {
            write(&mut w, &c.load(Ordering::Relaxed).to_le_bytes())?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut header = [0u8; 32];
        r.read_exact(&mut header)
            .map_err(|_| Error::format(path, "truncated header"))?;
        if header[0..4] != SPILL_MAGIC {
            return Err(Error::format(path, "bad magic; not a spilled table"));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != SPILL_VERSION {
            return Err(Error::format(path, format!("unsupported version {version}")));
        }
        let bucket_count = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let window_len = u32::from_le_bytes(header[16..20].try_into().unwrap());
        let stride = u32::from_le_bytes(header[20..24].try_into().unwrap());
        let total = u64::from_le_bytes(header[24..32].try_into().unwrap());
        let table = HashGramTable::new(bucket_count, window_len, stride)?;
        table.total_processed.store(total, Ordering::Relaxed);
        let mut buf = vec![0u8; 1 << 16];
        let mut filled = 0usize;
        while filled < bucket_count as usize {
            let want = ((bucket_count as usize - filled) * 4).min(buf.len());
            r.read_exact(&mut buf[..want])
                .map_err(|_| Error::format(path, "truncated counter data"))?;
            for chunk in buf[..want].chunks_exact(4) {
                let v = u32::from_le_bytes(chunk.try_into().unwrap());
                table.counts[filled].store(v, Ordering::Relaxed);
                filled += 1;
            }
        }
        Ok(table)
    }
}

#[inline]
fn saturating_increment(cell: &AtomicU32) {
    let mut current = cell.load(Ordering::Relaxed);
    while current != u32::MAX {
        match cell.compare_exchange_weak(current, current + 1, Ordering::Relaxed, Ordering::Relaxed)
        {
            Ok(_) => return,
            Err(seen) => current = seen,
        }
    }
}

const PROBE_EMPTY: u32 = u32::MAX;

/// Whitelist of top-k pass-1 bucket indices. Membership is a probe into a
/// small open-addressed table: the check runs once per window in pass 2, so
/// it has to cost nanoseconds, not a full SipHash round.
#[derive(Debug, Clone)]
pub struct TopKHashSet {
    sorted: Vec<u32>,
    probe: Box<[u32]>,
    mask: u64,
    threshold: u32,
}

impl TopKHashSet {
    fn new(sorted: Vec<u32>, threshold: u32) -> Self {
        let capacity = (sorted.len() * 4).max(16).next_power_of_two();
        let mask = capacity as u64 - 1;
        let mut probe = vec![PROBE_EMPTY; capacity].into_boxed_slice();
        for &bucket in &sorted {
            debug_assert_ne!(bucket, PROBE_EMPTY);
            let mut at = probe_slot(bucket) & mask;
            while probe[at as usize] != PROBE_EMPTY {
                at = (at + 1) & mask;
            }
            probe[at as usize] = bucket;
        }
        TopKHashSet {
            sorted,
            probe,
            mask,
            threshold,
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), 0)
    }

    #[inline]
    pub fn contains(&self, bucket: u64) -> bool {
        if bucket >= u32::MAX as u64 {
            return false;
        }
        let key = bucket as u32;
        let mut at = probe_slot(key) & self.mask;
        loop {
            let v = self.probe[at as usize];
            if v == key {
                return true;
            }
            if v == PROBE_EMPTY {
                return false;
            }
            at = (at + 1) & self.mask;
        }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Member bucket indices in ascending order.
    pub fn indices(&self) -> &[u32] {
        &self.sorted
    }

    /// Count of the k-th selected bucket (the selection threshold).
    pub fn threshold_count(&self) -> u32 {
        self.threshold
    }
}

/// Fibonacci-style scatter of a bucket index into the probe table.
#[inline]
fn probe_slot(bucket: u32) -> u64 {
    (bucket as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 32
}

/// Per-document outcomes of an ingest pass. Lengths are remembered so the
/// second pass can detect a corpus that changed under it.
#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    /// Byte length per document; `None` marks a document that failed to read
    /// and was skipped.
    pub doc_lengths: Vec<Option<u64>>,
    /// (document index, error) for each failed document.
    pub failures: Vec<(usize, String)>,
    /// Documents shorter than the window length (they contribute no windows).
    pub skipped_short: usize,
}

impl IngestReport {
    pub fn docs_processed(&self) -> usize {
        self.doc_lengths.iter().filter(|l| l.is_some()).count()
    }
}

/// Streams every window of a document and invokes `action(offset, bucket)`
/// for the windows whose bucket passes the stride check. Both extraction
/// passes and the oracle run this same skeleton, so their per-window cost
/// differs only by what `action` does.
#[inline]
pub fn scan_stride_passing(
    doc: &[u8],
    params: &crate::hash::HashParams,
    bucket_count: u64,
    stride: u64,
    mut action: impl FnMut(usize, u64),
) {
    let n = params.window_len();
    if doc.len() < n || n == 0 {
        return;
    }
    let mut h = crate::hash::hash_window(&doc[..n], params).expect("window length checked");
    let last_offset = doc.len() - n;
    let mut offset = 0usize;
    loop {
        let bucket = h.value() % bucket_count;
        if bucket.is_multiple_of(stride) {
            action(offset, bucket);
        }
        if offset == last_offset {
            break;
        }
        h = crate::hash::roll(h, doc[offset], doc[offset + n], params);
        offset += 1;
    }
}

/// Pass 1: stream every document, hash every window, and count the buckets
/// that pass the stride check. Unreadable documents are recorded in the
/// report and skipped; everything else proceeds.
pub fn tabulate(corpus: &CorpusSource, cfg: &ExtractionConfig) -> Result<(HashGramTable, IngestReport)> {
    let table = HashGramTable::new(
        cfg.bucket_count(),
        cfg.window_len() as u32,
        cfg.stride() as u32,
    )?;
    let bucket_count = cfg.bucket_count();
    let stride = cfg.stride();
    let window_len = cfg.window_len();
    let hash = cfg.hash();

    let outcomes: Vec<std::result::Result<u64, String>> = (0..corpus.doc_count())
        .into_par_iter()
        .map(|i| match corpus.read_doc(i) {
            Err(e) => Err(e.to_string()),
            Ok(doc) => {
                let mut processed = 0u64;
                scan_stride_passing(&doc, hash, bucket_count, stride, |_, bucket| {
                    table.increment(bucket);
                    processed += 1;
                });
                table.add_processed(processed);
                Ok(doc.len() as u64)
            }
        })
        .collect();

    let mut report = IngestReport::default();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(len) => {
                if (len as usize) < window_len {
                    report.skipped_short += 1;
                }
                report.doc_lengths.push(Some(len));
            }
            Err(msg) => {
                report.failures.push((i, msg));
                report.doc_lengths.push(None);
            }
        }
    }
    Ok((table, report))
}
