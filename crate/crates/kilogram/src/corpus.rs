//! Corpus abstraction: an ordered, immutable list of documents that both
//! extraction passes iterate in the same order. Documents are opaque byte
//! sequences; n-grams never cross document boundaries.

use std::fs;
use std::ops::Deref;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::synth::ZipfCorpus;

/// An ordered corpus of documents, backed by files on disk, in-memory
/// buffers, or a deterministic synthetic stream.
#[derive(Debug, Clone)]
pub struct CorpusSource {
    backing: Backing,
}

#[derive(Debug, Clone)]
enum Backing {
    Files(Arc<Vec<PathBuf>>),
    Memory(Arc<Vec<MemoryDoc>>),
    Synthetic(ZipfCorpus),
}

#[derive(Debug)]
struct MemoryDoc {
    id: String,
    bytes: Arc<[u8]>,
}

/// Bytes of one document; derefs to `&[u8]`.
pub enum DocBytes {
    Owned(Vec<u8>),
    Shared(Arc<[u8]>),
}

impl Deref for DocBytes {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        match self {
            DocBytes::Owned(v) => v,
            DocBytes::Shared(a) => a,
        }
    }
}

impl CorpusSource {
    /// All regular files under `dir`, recursively, in sorted path order.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut files = Vec::new();
        collect_files(dir, &mut files)?;
        files.sort();
        Ok(CorpusSource {
            backing: Backing::Files(Arc::new(files)),
        })
    }

    /// Paths listed one per line in `list`, kept in file order. Blank lines
    /// and `#` comments are skipped.
    pub fn from_list_file(list: impl AsRef<Path>) -> Result<Self> {
        let list = list.as_ref();
        let text = fs::read_to_string(list).map_err(|e| Error::io(list, e))?;
        let files: Vec<PathBuf> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(PathBuf::from)
            .collect();
        Ok(CorpusSource {
            backing: Backing::Files(Arc::new(files)),
        })
    }

    pub fn from_paths(paths: Vec<PathBuf>) -> Self {
        CorpusSource {
            backing: Backing::Files(Arc::new(paths)),
        }
    }

    /// In-memory documents, named `doc-00000`, `doc-00001`, ...
    pub fn from_docs(docs: Vec<Vec<u8>>) -> Self {
        Self::from_named_docs(
            docs.into_iter()
                .enumerate()
                .map(|(i, bytes)| (format!("doc-{i:05}"), bytes))
                .collect(),
        )
    }

    pub fn from_named_docs(docs: Vec<(String, Vec<u8>)>) -> Self {
        CorpusSource {
            backing: Backing::Memory(Arc::new(
                docs.into_iter()
                    .map(|(id, bytes)| MemoryDoc {
                        id,
                        bytes: bytes.into(),
                    })
                    .collect(),
            )),
        }
    }

    pub fn synthetic(corpus: ZipfCorpus) -> Self {
        CorpusSource {
            backing: Backing::Synthetic(corpus),
        }
    }

    pub fn doc_count(&self) -> usize {
        match &self.backing {
            Backing::Files(files) => files.len(),
            Backing::Memory(docs) => docs.len(),
            Backing::Synthetic(z) => z.doc_count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.doc_count() == 0
    }

    pub fn doc_id(&self, index: usize) -> String {
        match &self.backing {
            Backing::Files(files) => files[index].display().to_string(),
            Backing::Memory(docs) => docs[index].id.clone(),
            Backing::Synthetic(z) => z.doc_id(index),
        }
    }

    /// Document length in bytes without materializing the content (file
    /// metadata for file corpora).
    pub fn doc_len(&self, index: usize) -> Result<u64> {
        match &self.backing {
            Backing::Files(files) => {
                let path = &files[index];
                Ok(fs::metadata(path).map_err(|e| Error::io(path, e))?.len())
            }
            Backing::Memory(docs) => Ok(docs[index].bytes.len() as u64),
            Backing::Synthetic(z) => Ok(z.doc_len(index)),
        }
    }

    pub fn read_doc(&self, index: usize) -> Result<DocBytes> {
        match &self.backing {
            Backing::Files(files) => {
                let path = &files[index];
                Ok(DocBytes::Owned(
                    fs::read(path).map_err(|e| Error::io(path, e))?,
                ))
            }
            Backing::Memory(docs) => Ok(DocBytes::Shared(docs[index].bytes.clone())),
            Backing::Synthetic(z) => Ok(DocBytes::Owned(z.doc_bytes(index))),
        }
    }

    /// Backing file paths, when this corpus reads from disk.
    pub fn file_paths(&self) -> Option<&[PathBuf]> {
        match &self.backing {
            Backing::Files(files) => Some(files),
            _ => None,
        }
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let file_type = entry.file_type().map_err(|e| Error::io(&path, e))?;
        if file_type.is_dir() {
            collect_files(&path, out)?;
        } else if file_type.is_file() {
            out.push(path);
        }
    }
    Ok(())
}
