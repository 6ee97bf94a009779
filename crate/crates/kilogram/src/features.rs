//! Per-document feature vectors over a fixed set of equal-length n-grams.
//!
//! Counting matches occurrences at every byte offset (no stride: the stride
//! is a selection-time device only) via a single multi-pattern automaton
//! pass, so cost is linear in the corpus regardless of how many thousand
//! kilobyte-wide patterns are loaded.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use aho_corasick::AhoCorasick;
use rayon::prelude::*;

use crate::corpus::CorpusSource;
use crate::error::{Error, Result};
use crate::tsv::hex_upper;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Exact overlapping-occurrence counts.
    Count,
    /// Presence indicator: any count > 0 becomes 1.
    Binary,
}

/// Sparse per-document feature counts. Row order follows corpus order; each
/// row stores `(feature index, value)` pairs sorted by index with values
/// always >= 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    features: Vec<Vec<u8>>,
    mode: FeatureMode,
    rows: Vec<Vec<(u32, u64)>>,
    doc_ids: Vec<String>,
    labels: Option<Vec<String>>,
}

impl FeatureMatrix {
    pub fn features(&self) -> &[Vec<u8>] {
        &self.features
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    pub fn rows(&self) -> &[Vec<(u32, u64)>] {
        &self.rows
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn doc_count(&self) -> usize {
        self.rows.len()
    }

    /// Attaches one label per document, in row order. Labels may not contain
    /// whitespace (they appear as bare fields in the sparse text format).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.rows.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} documents",
                labels.len(),
                self.rows.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|l| {
            l.is_empty() || l.chars().any(char::is_whitespace)
        }) {
            return Err(Error::InvalidInput(format!(
                "label {bad:?} is empty or contains whitespace"
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Attaches labels keyed by document id (e.g. file path).
    pub fn with_labels_by_id(self, by_id: &HashMap<String, String>) -> Result<Self> {
        let labels = self
            .doc_ids
            .iter()
            .map(|id| {
                by_id
                    .get(id)
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput(format!("no label for document {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.with_labels(labels)
    }

    /// Documents (ascending indices) in which each feature is present.
    pub fn presence(&self) -> Vec<Vec<u32>> {
        let mut presence = vec![Vec::new(); self.features.len()];
        for (doc, row) in self.rows.iter().enumerate() {
            for &(feature, _) in row {
                presence[feature as usize].push(doc as u32);
            }
        }
        presence
    }

    /// Sparse text rows: `label idx:val idx:val ...` with 0-based indices.
    /// Documents without labels are written with label `0`.
    pub fn export_sparse<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            let label = self
                .labels
                .as_ref()
                .map(|l| l[i].as_str())
                .unwrap_or("0");
            write!(w, "{label}")?;
            for &(idx, val) in row {
                write!(w, " {idx}:{val}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Sidecar mapping feature index to hex n-gram, one `idx\thex` per line.
    pub fn write_feature_map<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (i, gram) in self.features.iter().enumerate() {
            writeln!(w, "{i}\t{}", hex_upper(gram))?;
        }
        Ok(())
    }

    /// Dense delimited export: header `label,<hex>,...`, one dense row per
    /// document.
    pub fn export_delimited<W: Write>(&self, w: &mut W) -> io::Result<()> {
        write!(w, "label")?;
        for gram in &self.features {
            write!(w, ",{}", hex_upper(gram))?;
        }
        writeln!(w)?;
        for (i, row) in self.rows.iter().enumerate() {
            let label = self
                .labels
                .as_ref()
                .map(|l| l[i].as_str())
                .unwrap_or("0");
            write!(w, "{label}")?;
            let mut dense = vec![0u64; self.features.len()];
            for &(idx, val) in row {
                dense[idx as usize] = val;
            }
            for v in dense {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Parses the sparse text format back together with its feature map.
    /// Document ids are synthesized (`row-N`); everything else round-trips.
    pub fn import_sparse(sparse: &str, feature_map: &str, mode: FeatureMode) -> Result<Self> {
        let mut features = Vec::new();
        for (lineno, line) in feature_map.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (idx, hex) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidInput(format!("feature map line {}: missing tab", lineno + 1))
            })?;
            let idx: usize = idx.parse().map_err(|_| {
                Error::InvalidInput(format!("feature map line {}: bad index", lineno + 1))
            })?;
            if idx != features.len() {
                return Err(Error::InvalidInput(format!(
                    "feature map line {}: expected index {}, got {idx}",
                    lineno + 1,
                    features.len()
                )));
            }
            features.push(crate::tsv::parse_hex(hex)?);
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (lineno, line) in sparse.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let label = fields.next().unwrap_or_default();
            labels.push(label.to_string());
            let mut row: Vec<(u32, u64)> = Vec::new();
            for field in fields {
                let (idx, val) = field.split_once(':').ok_or_else(|| {
                    Error::InvalidInput(format!("sparse line {}: bad field {field:?}", lineno + 1))
                })?;
                let idx: u32 = idx.parse().map_err(|_| {
                    Error::InvalidInput(format!("sparse line {}: bad index", lineno + 1))
                })?;
                if idx as usize >= features.len() {
                    return Err(Error::InvalidInput(format!(
                        "sparse line {}: index {idx} outside feature map",
                        lineno + 1
                    )));
                }
                let val: u64 = val.parse().map_err(|_| {
                    Error::InvalidInput(format!("sparse line {}: bad value", lineno + 1))
                })?;
                row.push((idx, val));
            }
            rows.push(row);
        }
        let doc_ids = (0..rows.len()).map(|i| format!("row-{i}")).collect();
        Ok(FeatureMatrix {
            features,
            mode,
            rows,
            doc_ids,
            labels: Some(labels),
        })
    }
}

/// Counts every feature at every offset of every document in one automaton
/// pass per document. Features must be nonempty, distinct, and equal-length.
pub fn vectorize(
    corpus: &CorpusSource,
    features: &[Vec<u8>],
    mode: FeatureMode,
) -> Result<FeatureMatrix> {
    if features.is_empty() {
        return Err(Error::InvalidInput("feature list is empty".into()));
    }
    let n = features[0].len();
    if n == 0 {
        return Err(Error::InvalidInput("features must be nonempty".into()));
    }
    if let Some(bad) = features.iter().find(|f| f.len() != n) {
        return Err(Error::InvalidInput(format!(
            "heterogeneous feature lengths: expected {n} bytes, found {}",
            bad.len()
        )));
    }
    let mut seen = HashSet::new();
    if !features.iter().all(|f| seen.insert(f.as_slice())) {
        return Err(Error::InvalidInput("duplicate feature".into()));
    }
    let automaton = AhoCorasick::new(features)
        .map_err(|e| Error::InvalidInput(format!("automaton construction failed: {e}")))?;

    let outcomes: Vec<Result<Vec<(u32, u64)>>> = (0..corpus.doc_count())
        .into_par_iter()
        .map(|i| {
            let doc = corpus.read_doc(i)?;
            let mut counts: HashMap<u32, u64> = HashMap::new();
            for m in automaton.find_overlapping_iter(&*doc) {
                *counts.entry(m.pattern().as_u32()).or_insert(0) += 1;
            }
            let mut row: Vec<(u32, u64)> = counts
                .into_iter()
                .map(|(idx, count)| match mode {
                    FeatureMode::Count => (idx, count),
                    FeatureMode::Binary => (idx, 1),
                })
                .collect();
            row.sort_unstable_by_key(|&(idx, _)| idx);
            Ok(row)
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        rows.push(outcome?);
    }
    let doc_ids = (0..corpus.doc_count()).map(|i| corpus.doc_id(i)).collect();
    Ok(FeatureMatrix {
        features: features.to_vec(),
        mode,
        rows,
        doc_ids,
        labels: None,
    })
}
