//! Bounded-size frequency summary with guaranteed per-item error bounds.
//!
//! Monitored items live in a slab; buckets of equal count form a doubly
//! linked list in ascending count order, and each bucket holds a queue of its
//! entries ordered by last update. That makes every offer O(1) amortized:
//! a hit moves an entry to the adjacent bucket, a miss either claims a free
//! slot or replaces the least-recently-updated minimum-count entry, charging
//! the evicted count as the newcomer's error bound.
//!
//! For every monitored item, `count - error <= true frequency <= count` over
//! everything offered so far; when no eviction has occurred the summary is an
//! exact frequency table.

use std::collections::HashMap;

use crate::error::{Error, Result};

const NIL: u32 = u32::MAX;

#[derive(Debug)]
struct Entry {
    gram: Box<[u8]>,
    count: u64,
    error: u64,
    bucket: u32,
    prev: u32,
    next: u32,
}

#[derive(Debug, Clone, Copy)]
struct Bucket {
    count: u64,
    /// Least recently updated entry; evicted first.
    head: u32,
    tail: u32,
    prev: u32,
    next: u32,
}

#[derive(Debug)]
pub struct SpaceSavingSummary {
    window_len: usize,
    capacity: usize,
    entries: Vec<Entry>,
    buckets: Vec<Bucket>,
    free_buckets: Vec<u32>,
    index: HashMap<Box<[u8]>, u32>,
    /// Bucket with the smallest count (front of the bucket list).
    min_bucket: u32,
    inserted_total: u64,
    evictions: u64,
}

impl SpaceSavingSummary {
    pub fn new(window_len: usize, capacity: usize) -> Result<Self> {
        if window_len == 0 {
            return Err(Error::Config("window length must be at least 1".into()));
        }
        if capacity == 0 {
            return Err(Error::Config("summary capacity must be at least 1".into()));
        }
        Ok(SpaceSavingSummary {
            window_len,
            capacity,
            entries: Vec::new(),
            buckets: Vec::new(),
            free_buckets: Vec::new(),
            index: HashMap::new(),
            min_bucket: NIL,
            inserted_total: 0,
            evictions: 0,
        })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of currently monitored n-grams.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn inserted_total(&self) -> u64 {
        self.inserted_total
    }

    pub fn evictions(&self) -> u64 {
        self.evictions
    }

    /// True while the summary has never evicted, i.e. every count is exact.
    pub fn is_exact(&self) -> bool {
        self.evictions == 0
    }

    /// Smallest monitored count, or 0 while the summary has spare capacity
    /// (an unmonitored item's true count is then 0).
    pub fn min_count(&self) -> u64 {
        if self.entries.len() < self.capacity {
            0
        } else {
            self.buckets[self.min_bucket as usize].count
        }
    }

    /// `(count, error)` for a monitored n-gram.
    pub fn get(&self, gram: &[u8]) -> Option<(u64, u64)> {
        self.index
            .get(gram)
            .map(|&idx| (self.entries[idx as usize].count, self.entries[idx as usize].error))
    }

    /// All monitored entries in slab order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u64, u64)> {
        self.entries.iter().map(|e| (&*e.gram, e.count, e.error))
    }

    /// Records one occurrence of `gram`.
    pub fn offer(&mut self, gram: &[u8]) -> Result<()> {
        if gram.len() != self.window_len {
            return Err(Error::WindowLength {
                expected: self.window_len,
                actual: gram.len(),
            });
        }
        self.inserted_total += 1;
        if let Some(&idx) = self.index.get(gram) {
            self.increment_entry(idx);
        } else if self.entries.len() < self.capacity {
            let idx = self.entries.len() as u32;
            let gram: Box<[u8]> = gram.into();
            self.index.insert(gram.clone(), idx);
            self.entries.push(Entry {
                gram,
                count: 1,
                error: 0,
                bucket: NIL,
                prev: NIL,
                next: NIL,
            });
            let target = if self.min_bucket != NIL
                && self.buckets[self.min_bucket as usize].count == 1
            {
                self.min_bucket
            } else {
                let b = self.alloc_bucket(1);
                self.link_bucket_front(b);
                b
            };
            self.append_entry(idx, target);
            self.entries[idx as usize].count = 1;
        } else {
            // Replace the least-recently-updated minimum entry; its count
            // becomes the newcomer's error bound.
            self.evictions += 1;
            let victim = self.buckets[self.min_bucket as usize].head;
            let old_count = self.buckets[self.min_bucket as usize].count;
            let new_gram: Box<[u8]> = gram.into();
            let old_gram = std::mem::replace(&mut self.entries[victim as usize].gram, new_gram);
            self.index.remove(&old_gram);
            self.index
                .insert(self.entries[victim as usize].gram.clone(), victim);
            debug_assert_eq!(self.entries[victim as usize].count, old_count);
            self.entries[victim as usize].error = old_count;
            self.increment_entry(victim);
        }
        Ok(())
    }

    /// Largest-count entries, descending, ties broken by lexicographically
    /// smaller n-gram.
    pub fn top_entries(&self, k: usize) -> Vec<(Vec<u8>, u64, u64)> {
        let mut all: Vec<(Vec<u8>, u64, u64)> = self
            .entries
            .iter()
            .map(|e| (e.gram.to_vec(), e.count, e.error))
            .collect();
        all.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }

    /// Combines two summaries over disjoint stream halves into a summary
    /// valid for the concatenated stream. Counts and errors of n-grams
    /// monitored on both sides are summed; an n-gram monitored on one side
    /// only gets the other side's minimum count added to both its count and
    /// its error, covering whatever that side may have seen of it. The
    /// largest `capacity` results are kept (ties to the lexicographically
    /// smaller n-gram).
    pub fn merge(&self, other: &Self) -> Result<Self> {
        self.check_mergeable(other)?;
        Self::merge_parts(
            self.window_len,
            self.capacity,
            self.entries
                .iter()
                .map(|e| (e.gram.clone(), e.count, e.error))
                .collect(),
            self.min_count(),
            other
                .entries
                .iter()
                .map(|e| (e.gram.clone(), e.count, e.error))
                .collect(),
            other.min_count(),
            self.inserted_total + other.inserted_total,
            self.evictions + other.evictions,
        )
    }

    /// [`merge`](Self::merge) that consumes both summaries, moving the stored
    /// n-grams instead of copying them. Preferred when folding many
    /// per-worker summaries of wide n-grams.
    pub fn merge_owned(self, other: Self) -> Result<Self> {
        self.check_mergeable(&other)?;
        let min_self = self.min_count();
        let min_other = other.min_count();
        let inserted_total = self.inserted_total + other.inserted_total;
        let evictions = self.evictions + other.evictions;
        Self::merge_parts(
            self.window_len,
            self.capacity,
            self.entries
                .into_iter()
                .map(|e| (e.gram, e.count, e.error))
                .collect(),
            min_self,
            other
                .entries
                .into_iter()
                .map(|e| (e.gram, e.count, e.error))
                .collect(),
            min_other,
            inserted_total,
            evictions,
        )
    }

    fn check_mergeable(&self, other: &Self) -> Result<()> {
        if self.window_len != other.window_len {
            return Err(Error::InvalidInput(format!(
                "cannot merge summaries over {}-byte and {}-byte n-grams",
                self.window_len, other.window_len
            )));
        }
        if self.capacity != other.capacity {
            return Err(Error::InvalidInput(format!(
                "cannot merge summaries of capacity {} and {}",
                self.capacity, other.capacity
            )));
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn merge_parts(
        window_len: usize,
        capacity: usize,
        from_self: Vec<(Box<[u8]>, u64, u64)>,
        min_self: u64,
        from_other: Vec<(Box<[u8]>, u64, u64)>,
        min_other: u64,
        inserted_total: u64,
        evictions: u64,
    ) -> Result<Self> {
        let mut map: HashMap<Box<[u8]>, (u64, u64, bool)> = from_self
            .into_iter()
            .map(|(gram, count, error)| (gram, (count, error, false)))
            .collect();
        let mut merged: Vec<(Box<[u8]>, u64, u64)> = Vec::new();
        for (gram, count, error) in from_other {
            match map.get_mut(&gram) {
                Some(slot) => {
                    slot.0 += count;
                    slot.1 += error;
                    slot.2 = true;
                }
                None => merged.push((gram, count + min_self, error + min_self)),
            }
        }
        for (gram, (count, error, in_both)) in map {
            if in_both {
                merged.push((gram, count, error));
            } else {
                merged.push((gram, count + min_other, error + min_other));
            }
        }
        merged.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        merged.truncate(capacity);

        let mut out = SpaceSavingSummary::new(window_len, capacity)?;
        out.inserted_total = inserted_total;
        out.evictions = evictions;
        // Rebuild from the smallest count up so buckets chain in order.
        for (gram, count, error) in merged.into_iter().rev() {
            let idx = out.entries.len() as u32;
            out.index.insert(gram.clone(), idx);
            out.entries.push(Entry {
                gram,
                count,
                error,
                bucket: NIL,
                prev: NIL,
                next: NIL,
            });
            let tail_bucket = out.last_bucket();
            let target = if tail_bucket != NIL && out.buckets[tail_bucket as usize].count == count
            {
                tail_bucket
            } else {
                let b = out.alloc_bucket(count);
                out.link_bucket_back(b, tail_bucket);
                b
            };
            out.append_entry(idx, target);
        }
        Ok(out)
    }

    fn increment_entry(&mut self, idx: u32) {
        let old_bucket = self.entries[idx as usize].bucket;
        let new_count = self.entries[idx as usize].count + 1;
        let next_b = self.buckets[old_bucket as usize].next;
        let target = if next_b != NIL && self.buckets[next_b as usize].count == new_count {
            next_b
        } else {
            let b = self.alloc_bucket(new_count);
            self.link_bucket_after(b, old_bucket);
            b
        };
        self.detach_entry(idx);
        self.entries[idx as usize].count = new_count;
        self.append_entry(idx, target);
        if self.buckets[old_bucket as usize].head == NIL {
            self.unlink_bucket(old_bucket);
        }
    }

    fn detach_entry(&mut self, idx: u32) {
        let (bucket, prev, next) = {
            let e = &self.entries[idx as usize];
            (e.bucket, e.prev, e.next)
        };
        if prev != NIL {
            self.entries[prev as usize].next = next;
        } else {
            self.buckets[bucket as usize].head = next;
        }
        if next != NIL {
            self.entries[next as usize].prev = prev;
        } else {
            self.buckets[bucket as usize].tail = prev;
        }
        let e = &mut self.entries[idx as usize];
        e.bucket = NIL;
        e.prev = NIL;
        e.next = NIL;
    }

    fn append_entry(&mut self, idx: u32, bucket: u32) {
        let tail = self.buckets[bucket as usize].tail;
        {
            let e = &mut self.entries[idx as usize];
            e.bucket = bucket;
            e.prev = tail;
            e.next = NIL;
        }
        if tail != NIL {
            self.entries[tail as usize].next = idx;
        } else {
            self.buckets[bucket as usize].head = idx;
        }
        self.buckets[bucket as usize].tail = idx;
    }

    fn alloc_bucket(&mut self, count: u64) -> u32 {
        let bucket = Bucket {
            count,
            head: NIL,
            tail: NIL,
            prev: NIL,
            next: NIL,
        };
        match self.free_buckets.pop() {
            Some(b) => {
                self.buckets[b as usize] = bucket;
                b
            }
            None => {
                self.buckets.push(bucket);
                (self.buckets.len() - 1) as u32
            }
        }
    }

    fn link_bucket_front(&mut self, b: u32) {
        let old_min = self.min_bucket;
        self.buckets[b as usize].next = old_min;
        if old_min != NIL {
            self.buckets[old_min as usize].prev = b;
        }
        self.min_bucket = b;
    }

    fn link_bucket_after(&mut self, b: u32, after: u32) {
        let next = self.buckets[after as usize].next;
        self.buckets[b as usize].prev = after;
        self.buckets[b as usize].next = next;
        self.buckets[after as usize].next = b;
        if next != NIL {
            self.buckets[next as usize].prev = b;
        }
    }

    /// Appends bucket `b` after `tail` (NIL means the list is empty).
    fn link_bucket_back(&mut self, b: u32, tail: u32) {
        if tail == NIL {
            self.min_bucket = b;
        } else {
            self.link_bucket_after(b, tail);
        }
    }

    fn last_bucket(&self) -> u32 {
        let mut b = self.min_bucket;
        if b == NIL {
            return NIL;
        }
        while self.buckets[b as usize].next != NIL {
            b = self.buckets[b as usize].next;
        }
        b
    }

    fn unlink_bucket(&mut self, b: u32) {
        let prev = self.buckets[b as usize].prev;
        let next = self.buckets[b as usize].next;
        if prev != NIL {
            self.buckets[prev as usize].next = next;
        }
        if next != NIL {
            self.buckets[next as usize].prev = prev;
        }
        if self.min_bucket == b {
            self.min_bucket = next;
        }
        self.free_buckets.push(b);
    }
}
