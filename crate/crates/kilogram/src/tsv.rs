//! Result file format: TSV with `#`-prefixed header comments naming the run
//! parameters, then one row per n-gram as uppercase hex, count, and error.
//! The oracle writes the identical format so outputs diff cleanly.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use crate::config::ExtractionConfig;
use crate::error::{Error, Result};
use crate::pipeline::RankedGram;

/// Uppercase hex with no separators; a 1024-gram becomes 2048 hex chars.
pub fn hex_upper(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push(char::from_digit((b >> 4) as u32, 16).unwrap().to_ascii_uppercase());
        out.push(char::from_digit((b & 0xF) as u32, 16).unwrap().to_ascii_uppercase());
    }
    out
}

pub fn parse_hex(text: &str) -> Result<Vec<u8>> {
    if !text.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "hex string has odd length {}",
            text.len()
        )));
    }
    let digits = text.as_bytes();
    let mut out = Vec::with_capacity(digits.len() / 2);
    for pair in digits.chunks_exact(2) {
        let hi = (pair[0] as char)
            .to_digit(16)
            .ok_or_else(|| Error::InvalidInput(format!("invalid hex digit {:?}", pair[0] as char)))?;
        let lo = (pair[1] as char)
            .to_digit(16)
            .ok_or_else(|| Error::InvalidInput(format!("invalid hex digit {:?}", pair[1] as char)))?;
        out.push(((hi << 4) | lo) as u8);
    }
    Ok(out)
}

/// Writes the header comments (n, k, B, s, Bs, L) and ranked rows.
pub fn write_topk<W: Write>(
    w: &mut W,
    cfg: &ExtractionConfig,
    total_processed: u64,
    entries: &[RankedGram],
) -> io::Result<()> {
    writeln!(w, "# n\t{}", cfg.window_len())?;
    writeln!(w, "# k\t{}", cfg.top_k())?;
    writeln!(w, "# B\t{}", cfg.bucket_count())?;
    writeln!(w, "# s\t{}", cfg.stride())?;
    writeln!(w, "# Bs\t{}", cfg.summary_capacity())?;
    writeln!(w, "# L\t{total_processed}")?;
    for entry in entries {
        writeln!(w, "{}\t{}\t{}", hex_upper(&entry.gram), entry.count, entry.error)?;
    }
    Ok(())
}

pub fn write_topk_file(
    path: impl AsRef<Path>,
    cfg: &ExtractionConfig,
    total_processed: u64,
    entries: &[RankedGram],
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_topk(&mut w, cfg, total_processed, entries).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parsed result file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKTsv {
    pub window_len: usize,
    pub top_k: usize,
    pub bucket_count: u64,
    pub stride: u64,
    pub summary_capacity: usize,
    pub total_processed: u64,
    pub entries: Vec<RankedGram>,
}

pub fn read_topk_file(path: impl AsRef<Path>) -> Result<TopKTsv> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_topk(&text).map_err(|e| Error::format(path, e.to_string()))
}

pub fn parse_topk(text: &str) -> Result<TopKTsv> {
    let mut header: std::collections::HashMap<&str, &str> = Default::default();
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix("# ") {
            let (key, value) = comment.split_once('\t').ok_or_else(|| {
                Error::InvalidInput(format!("line {}: malformed header", lineno + 1))
            })?;
            header.insert(key, value);
            continue;
        }
        let mut fields = line.split('\t');
        let (gram, count, error) = match (fields.next(), fields.next(), fields.next(), fields.next())
        {
            (Some(g), Some(c), Some(e), None) => (g, c, e),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 3 tab-separated fields",
                    lineno + 1
                )))
            }
        };
        entries.push(RankedGram {
            gram: parse_hex(gram)?,
            count: count
                .parse()
                .map_err(|_| Error::InvalidInput(format!("line {}: bad count", lineno + 1)))?,
            error: error
                .parse()
                .map_err(|_| Error::InvalidInput(format!("line {}: bad error", lineno + 1)))?,
        });
    }
    let get = |key: &str| -> Result<u64> {
        header
            .get(key)
            .ok_or_else(|| Error::InvalidInput(format!("missing header field {key}")))?
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad header field {key}")))
    };
    let parsed = TopKTsv {
        window_len: get("n")? as usize,
        top_k: get("k")? as usize,
        bucket_count: get("B")?,
        stride: get("s")?,
        summary_capacity: get("Bs")? as usize,
        total_processed: get("L")?,
        entries,
    };
    for e in &parsed.entries {
        if e.gram.len() != parsed.window_len {
            return Err(Error::InvalidInput(format!(
                "row gram has {} bytes, header says n={}",
                e.gram.len(),
                parsed.window_len
            )));
        }
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_cfg() -> ExtractionConfig {
        ExtractionConfig::new(3, 2)
            .unwrap()
            .with_bucket_count(65_521)
            .unwrap()
            .with_stride(1)
            .unwrap()
    }

    #[test]
    fn hex_roundtrip_and_case() {
        assert_eq!(hex_upper(&[0xDE, 0xAD, 0x01]), "DEAD01");
        assert_eq!(parse_hex("DEAD01").unwrap(), vec![0xDE, 0xAD, 0x01]);
        assert_eq!(parse_hex("dead01").unwrap(), vec![0xDE, 0xAD, 0x01]);
        assert!(parse_hex("ABC").is_err());
        assert!(parse_hex("ZZ").is_err());
    }

    #[test]
    fn golden_output_is_byte_stable() {
        let entries = vec![
            RankedGram {
                gram: b"abc".to_vec(),
                count: 3,
                error: 0,
            },
            RankedGram {
                gram: b"bca".to_vec(),
                count: 2,
                error: 1,
            },
        ];
        let mut buf = Vec::new();
        write_topk(&mut buf, &sample_cfg(), 7, &entries).unwrap();
        let expected = "# n\t3\n# k\t2\n# B\t65521\n# s\t1\n# Bs\t300002\n# L\t7\n\
                        616263\t3\t0\n626361\t2\t1\n";
        assert_eq!(String::from_utf8(buf).unwrap(), expected);
    }

    #[test]
    fn parse_roundtrip() {
        let entries = vec![RankedGram {
            gram: vec![0x00, 0xFF, 0x7F],
            count: 42,
            error: 2,
        }];
        let mut buf = Vec::new();
        write_topk(&mut buf, &sample_cfg(), 99, &entries).unwrap();
        let parsed = parse_topk(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed.window_len, 3);
        assert_eq!(parsed.top_k, 2);
        assert_eq!(parsed.bucket_count, 65_521);
        assert_eq!(parsed.stride, 1);
        assert_eq!(parsed.summary_capacity, 300_002);
        assert_eq!(parsed.total_processed, 99);
        assert_eq!(parsed.entries, entries);
    }

    #[test]
    fn parse_rejects_malformed_rows() {
        assert!(parse_topk("# n\t3\nnot hex\t1\t0\n").is_err());
        assert!(parse_topk("# n\t3\n616263\t1\n").is_err());
        assert!(parse_topk("616263\t1\t0\n").is_err()); // headers missing
        // Gram width must match the header.
        assert!(parse_topk("# n\t2\n# k\t1\n# B\t10\n# s\t1\n# Bs\t5\n# L\t0\n616263\t1\t0\n")
            .is_err());
    }
}
