//! Shared fixtures for the CLI integration and acceptance suites.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kilogram::hash::{hash_window, HashParams};
use kilogram::synth::SplitMix64;
use kilogram::CorpusSource;

pub fn kilogram_bin() -> &'static str {
    env!("CARGO_BIN_EXE_kilogram")
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(kilogram_bin())
        .args(args)
        .output()
        .expect("spawn kilogram binary")
}

pub fn assert_success(out: &Output, context: &str) {
    assert!(
        out.status.success(),
        "{context} failed (status {:?}):\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Writes every document of a corpus into `dir` as `doc-NNNNN.bin`.
pub fn write_corpus_dir(dir: &Path, corpus: &CorpusSource) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..corpus.doc_count() {
        let doc = corpus.read_doc(i).unwrap();
        std::fs::write(dir.join(format!("doc-{i:05}.bin")), &*doc).unwrap();
    }
}

/// Rejection-samples a random `n`-byte block whose bucket passes the stride
/// predicate under the given parameters.
pub fn stride_passing_block(
    n: usize,
    stride: u64,
    bucket_count: u64,
    hash: &HashParams,
    rng: &mut SplitMix64,
) -> Vec<u8> {
    loop {
        let mut block = vec![0u8; n];
        rng.fill_bytes(&mut block);
        if (hash_window(&block, hash).unwrap().value() % bucket_count).is_multiple_of(stride) {
            return block;
        }
    }
}

pub struct LabeledFixture {
    pub corpus_dir: PathBuf,
    pub labels_file: PathBuf,
    pub marker: Vec<u8>,
}

/// A 32-document fixture for 8-gram runs with stride 2 and a 1,048,573
/// bucket table: every document is random noise plus three shared frequent
/// sequences; the first half additionally carries a `mal`-only marker.
/// All planted sequences pass the stride predicate so extraction finds them.
pub fn write_labeled_fixture(base: &Path) -> LabeledFixture {
    let n = 8;
    let stride = 2;
    let bucket_count = 1_048_573;
    let hash = HashParams::new(n).unwrap();
    let mut rng = SplitMix64::new(0xF1C5);

    let marker = stride_passing_block(n, stride, bucket_count, &hash, &mut rng);
    let commons: Vec<Vec<u8>> = (0..3)
        .map(|_| stride_passing_block(n, stride, bucket_count, &hash, &mut rng))
        .collect();

    let corpus_dir = base.join("corpus");
    std::fs::create_dir_all(&corpus_dir).unwrap();
    let mut labels = String::new();
    for i in 0..32usize {
        let mut doc = vec![0u8; 4096];
        rng.fill_bytes(&mut doc);
        for (j, common) in commons.iter().enumerate() {
            for slot in 0..3usize {
                let at = 128 * (3 * j + slot + 1) + (rng.next_below(64) as usize);
                doc[at..at + n].copy_from_slice(common);
            }
        }
        let label = if i < 16 { "mal" } else { "ben" };
        if label == "mal" {
            for slot in 0..3usize {
                let at = 2048 + 300 * slot + (rng.next_below(128) as usize);
                doc[at..at + n].copy_from_slice(&marker);
            }
        }
        let path = corpus_dir.join(format!("doc-{i:05}.bin"));
        std::fs::write(&path, &doc).unwrap();
        labels.push_str(&format!("{}\t{label}\n", path.display()));
    }
    let labels_file = base.join("labels.tsv");
    std::fs::write(&labels_file, labels).unwrap();
    LabeledFixture {
        corpus_dir,
        labels_file,
        marker,
    }
}
