//! Run manifests: a JSON record written next to every output file with the
//! resolved configuration, a digest of every input document, tool version,
//! and wall timings. Identical config and input digests imply byte-identical
//! outputs; the timing block is informational only.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use kilogram::corpus::CorpusSource;
use kilogram::{Error, ExtractionConfig, Result};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigEcho>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
    pub stats: BTreeMap<String, serde_json::Value>,
}

/// The fully resolved extraction parameters.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub window_len: usize,
    pub top_k: usize,
    pub bucket_count: u64,
    pub stride: u64,
    pub summary_capacity: usize,
    pub hash_multiplier: u64,
}

impl From<&ExtractionConfig> for ConfigEcho {
    fn from(cfg: &ExtractionConfig) -> Self {
        ConfigEcho {
            window_len: cfg.window_len(),
            top_k: cfg.top_k(),
            bucket_count: cfg.bucket_count(),
            stride: cfg.stride(),
            summary_capacity: cfg.summary_capacity(),
            hash_multiplier: cfg.hash().multiplier(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub id: String,
    pub bytes: u64,
    pub crc32: u32,
}

impl RunManifest {
    pub fn new(command: &str, threads: Option<usize>) -> Self {
        RunManifest {
            tool: "kilogram",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            threads,
            config: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings_ms: BTreeMap::new(),
            stats: BTreeMap::new(),
        }
    }

    pub fn set_config(&mut self, cfg: &ExtractionConfig) {
        self.config = Some(cfg.into());
    }

    /// Records size and checksum of every corpus document.
    pub fn digest_corpus(&mut self, corpus: &CorpusSource) -> Result<()> {
        for i in 0..corpus.doc_count() {
            let doc = corpus.read_doc(i)?;
            let mut hasher = crc32fast::Hasher::new();
            hasher.update(&doc);
            self.inputs.push(InputDigest {
                id: corpus.doc_id(i),
                bytes: doc.len() as u64,
                crc32: hasher.finalize(),
            });
        }
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn record_timing(&mut self, name: &str, millis: u128) {
        self.timings_ms.insert(name.to_string(), millis);
    }

    pub fn record_stat(&mut self, name: &str, value: impl Into<serde_json::Value>) {
        self.stats.insert(name.to_string(), value.into());
    }

    /// Writes `<output>.manifest.json` next to the given output path.
    pub fn write_next_to(&self, output: &Path) -> Result<()> {
        let mut name = output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "output".to_string());
        name.push_str(".manifest.json");
        let path = output.with_file_name(name);
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("manifest serialization failed: {e}")))?;
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }
}
