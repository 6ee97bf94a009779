//! Top-k frequent byte n-gram extraction for very large n (1024 bytes and
//! beyond), built around a two-pass scheme: a hashed bucket-counting pass with
//! a deterministic hash-stride filter, followed by a whitelisted Space-Saving
//! pass that recovers the actual n-gram bytes with guaranteed count bounds.
//!
//! On top of the extractor the crate provides exact brute-force oracles for
//! verification, Zipf-distribution math and synthetic stream generation for
//! empirical bound checks, per-document feature vectorization over the
//! discovered n-grams, and automatic Yara-syntax signature generation.

pub mod config;
pub mod corpus;
pub mod error;
pub mod features;
pub mod hash;
pub mod hashgram;
pub mod oracle;
pub mod pipeline;
pub mod signatures;
pub mod space_saving;
pub mod synth;
pub mod tsv;
pub mod zipf;

pub use config::ExtractionConfig;
pub use corpus::CorpusSource;
pub use error::{Error, Result};
pub use features::{FeatureMatrix, FeatureMode};
pub use hash::{HashParams, WindowHash};
pub use hashgram::{HashGramTable, IngestReport, TopKHashSet};
pub use pipeline::{RankedGram, TopKResult};
pub use signatures::{RuleMetrics, SignatureRule};
pub use space_saving::SpaceSavingSummary;
pub use zipf::ZipfModel;
