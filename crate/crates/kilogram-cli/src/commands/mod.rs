pub mod bench;
pub mod bound;
pub mod oracle;
pub mod topk;
pub mod vectorize;
pub mod yara;
pub mod zipf;

use std::collections::HashMap;
use std::path::Path;

use kilogram::config::{is_prime, DEFAULT_BUCKET_COUNT};
use kilogram::{CorpusSource, Error, ExtractionConfig, Result};

/// A corpus argument is either a directory (walked recursively, sorted) or a
/// list file with one document path per line.
pub fn corpus_from_input(input: &Path) -> Result<CorpusSource> {
    if input.is_dir() {
        CorpusSource::from_dir(input)
    } else {
        CorpusSource::from_list_file(input)
    }
}

/// Resolves CLI overrides into a validated configuration, warning when a
/// bucket-count override is not prime.
pub fn build_config(
    n: usize,
    k: usize,
    stride: Option<u64>,
    table_size: Option<u64>,
    ss_capacity: Option<usize>,
    multiplier: Option<u64>,
) -> Result<ExtractionConfig> {
    let mut cfg = ExtractionConfig::new(n, k)?;
    if let Some(b) = table_size {
        if b != DEFAULT_BUCKET_COUNT && !is_prime(b) {
            eprintln!(
                "warning: table size {b} is not prime; expect slightly more bucket collisions"
            );
        }
        cfg = cfg.with_bucket_count(b)?;
    }
    if let Some(s) = stride {
        cfg = cfg.with_stride(s)?;
    }
    if let Some(c) = ss_capacity {
        cfg = cfg.with_summary_capacity(c)?;
    }
    if let Some(m) = multiplier {
        cfg = cfg.with_multiplier(m)?;
    }
    Ok(cfg)
}

/// Parses a labels file: one `<path>\t<label>` per line, `#` comments and
/// blank lines ignored.
pub fn load_labels_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (doc, label) = line.split_once('\t').ok_or_else(|| {
            Error::format(path, format!("line {}: expected <path>\\t<label>", lineno + 1))
        })?;
        labels.insert(doc.to_string(), label.to_string());
    }
    Ok(labels)
}

/// Parses values like `1e15`, `2147483629`, or `1_000_000` into a u64.
pub fn parse_magnitude(text: &str) -> Result<u64> {
    let cleaned = text.replace('_', "");
    if let Ok(v) = cleaned.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = cleaned
        .parse()
        .map_err(|_| Error::InvalidInput(format!("cannot parse {text:?} as a count")))?;
    if !v.is_finite() || v < 0.0 || v > u64::MAX as f64 {
        return Err(Error::InvalidInput(format!("{text:?} out of range")));
    }
    Ok(v.round() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magnitudes_parse_in_both_notations() {
        assert_eq!(parse_magnitude("123").unwrap(), 123);
        assert_eq!(parse_magnitude("1e15").unwrap(), 1_000_000_000_000_000);
        assert_eq!(parse_magnitude("2_147_483_629").unwrap(), 2_147_483_629);
        assert_eq!(parse_magnitude("2.5e3").unwrap(), 2500);
        assert!(parse_magnitude("abc").is_err());
        assert!(parse_magnitude("-5").is_err());
    }

    #[test]
    fn config_overrides_apply() {
        let cfg = build_config(64, 100, Some(8), Some(1_048_573), Some(5000), None).unwrap();
        assert_eq!(cfg.stride(), 8);
        assert_eq!(cfg.bucket_count(), 1_048_573);
        assert_eq!(cfg.summary_capacity(), 5000);
        assert!(build_config(64, 0, None, None, None, None).is_err());
    }
}
