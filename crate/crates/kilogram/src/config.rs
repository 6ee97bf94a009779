//! Extraction parameters shared by both passes.

use crate::error::{Error, Result};
use crate::hash::HashParams;
use crate::zipf::default_ss_capacity;

/// Default bucket-table size: 2^31 - 19, a prime. At four bytes per counter
/// the table costs about 8.6 GB, sized for server-scale corpora; desk-scale
/// runs override it downward.
pub const DEFAULT_BUCKET_COUNT: u64 = 2_147_483_629;

/// Parameters for one extraction run: the n-gram width, how many frequent
/// n-grams to keep, the pass-1 bucket-table size, the hash-stride
/// downsampling factor, and the pass-2 Space-Saving capacity.
#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    window_len: usize,
    top_k: usize,
    bucket_count: u64,
    stride: u64,
    summary_capacity: usize,
    hash: HashParams,
}

impl ExtractionConfig {
    /// Configuration with defaults: stride `ceil(n/4)`, bucket count
    /// 2^31 - 19, and Space-Saving capacity `max(k + 300000, 3k)`.
    pub fn new(window_len: usize, top_k: usize) -> Result<Self> {
        if top_k == 0 {
            return Err(Error::Config("top-k must be at least 1".into()));
        }
        let cfg = ExtractionConfig {
            window_len,
            top_k,
            bucket_count: DEFAULT_BUCKET_COUNT,
            stride: default_stride(window_len),
            summary_capacity: default_ss_capacity(top_k as u64) as usize,
            hash: HashParams::new(window_len)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stride(mut self, stride: u64) -> Result<Self> {
        self.stride = stride;
        self.validate()?;
        Ok(self)
    }

    /// Overrides the bucket-table size. Anything other than the default must
    /// leave room for k stride-passing buckets (`bucket_count >= k * stride`).
    pub fn with_bucket_count(mut self, bucket_count: u64) -> Result<Self> {
        self.bucket_count = bucket_count;
        self.validate()?;
        Ok(self)
    }

    pub fn with_summary_capacity(mut self, capacity: usize) -> Result<Self> {
        self.summary_capacity = capacity;
        self.validate()?;
        Ok(self)
    }

    pub fn with_multiplier(mut self, multiplier: u64) -> Result<Self> {
        self.hash = HashParams::with_multiplier(self.window_len, multiplier)?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if self.bucket_count == 0 {
            return Err(Error::Config("bucket count must be at least 1".into()));
        }
        if self.bucket_count > DEFAULT_BUCKET_COUNT {
            return Err(Error::Config(format!(
                "bucket count {} exceeds the maximum {DEFAULT_BUCKET_COUNT}",
                self.bucket_count
            )));
        }
        if self.bucket_count != DEFAULT_BUCKET_COUNT
            && self.bucket_count < self.top_k as u64 * self.stride
        {
            return Err(Error::Config(format!(
                "bucket count override {} is below k * stride = {}",
                self.bucket_count,
                self.top_k as u64 * self.stride
            )));
        }
        if self.top_k as u64 > self.bucket_count / self.stride {
            return Err(Error::Config(format!(
                "top-k {} exceeds bucket_count / stride = {}",
                self.top_k,
                self.bucket_count / self.stride
            )));
        }
        if self.summary_capacity < self.top_k {
            return Err(Error::Config(format!(
                "summary capacity {} is below top-k {}",
                self.summary_capacity, self.top_k
            )));
        }
        Ok(())
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    pub fn bucket_count(&self) -> u64 {
        self.bucket_count
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    pub fn summary_capacity(&self) -> usize {
        self.summary_capacity
    }

    pub fn hash(&self) -> &HashParams {
        &self.hash
    }
}

/// The default hash-stride for a window length: `ceil(n/4)`.
pub fn default_stride(window_len: usize) -> u64 {
    (window_len as u64).div_ceil(4)
}

/// Trial-division primality check, used to warn about bucket-count overrides
/// that are not prime.
pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x.is_multiple_of(2) {
        return x == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= x {
        if x.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_parameter_rules() {
        let cfg = ExtractionConfig::new(1024, 100_000).unwrap();
        assert_eq!(cfg.stride(), 256);
        assert_eq!(cfg.bucket_count(), DEFAULT_BUCKET_COUNT);
        assert_eq!(cfg.summary_capacity(), 400_000);
        let cfg = ExtractionConfig::new(3, 10).unwrap();
        assert_eq!(cfg.stride(), 1);
        assert_eq!(cfg.summary_capacity(), 300_010);
    }

    #[test]
    fn default_stride_rounds_up() {
        assert_eq!(default_stride(1), 1);
        assert_eq!(default_stride(4), 1);
        assert_eq!(default_stride(5), 2);
        assert_eq!(default_stride(8), 2);
        assert_eq!(default_stride(1024), 256);
    }

    #[test]
    fn bucket_override_must_fit_k_stride_buckets() {
        let cfg = ExtractionConfig::new(64, 100).unwrap();
        assert!(cfg.clone().with_bucket_count(100 * 16).is_ok());
        let cfg = ExtractionConfig::new(64, 100).unwrap();
        assert!(cfg.with_bucket_count(100 * 16 - 1).is_err());
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(ExtractionConfig::new(0, 10).is_err());
        assert!(ExtractionConfig::new(8, 0).is_err());
        let cfg = ExtractionConfig::new(8, 10).unwrap();
        assert!(cfg.clone().with_stride(0).is_err());
        assert!(cfg.clone().with_summary_capacity(9).is_err());
        assert!(cfg.with_bucket_count(DEFAULT_BUCKET_COUNT + 1).is_err());
    }

    #[test]
    fn default_bucket_count_is_prime() {
        assert!(is_prime(DEFAULT_BUCKET_COUNT));
        assert!(is_prime(1_048_573));
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(1 << 20));
        assert!(!is_prime(2_147_483_628));
    }
}
