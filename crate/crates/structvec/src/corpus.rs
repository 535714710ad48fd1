//! Sliced-corpus ingestion.
//!
//! A corpus is a set of named slices (years, categories, authors), each slice
//! a list of documents, each document a sequence of pre-lemmatized tokens.
//! Two on-disk layouts are supported:
//!
//! * `jsonl` — one JSON object per line with fields `"slice"` and `"tokens"`;
//!   slices are ordered by first appearance.
//! * `slice-dirs` — one directory per slice (lexicographic order), every file
//!   inside holds one whitespace-tokenized document per line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// On-disk corpus layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    SliceDirs,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "slice-dirs" => Ok(CorpusFormat::SliceDirs),
            other => Err(Error::Config(format!(
                "unknown corpus format {other:?} (expected \"jsonl\" or \"slice-dirs\")"
            ))),
        }
    }
}

/// One sub-corpus: a label plus its documents.
#[derive(Debug, Clone)]
pub struct Slice {
    pub id: String,
    pub documents: Vec<Vec<String>>,
}

impl Slice {
    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }
}

/// Token sequences grouped into named slices, in a fixed order.
#[derive(Debug, Clone)]
pub struct SlicedCorpus {
    slices: Vec<Slice>,
}

impl SlicedCorpus {
    /// Validates and wraps a slice list: at least two slices, unique
    /// non-empty ids without control characters, no slice without tokens.
    pub fn new(slices: Vec<Slice>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::validation("no slices found"));
        }
        if slices.len() < 2 {
            return Err(Error::validation(format!(
                "need at least 2 slices, found {} ({:?})",
                slices.len(),
                slices[0].id
            )));
        }
        let mut seen = HashMap::new();
        for slice in &slices {
            validate_label(&slice.id)?;
            if seen.insert(slice.id.clone(), ()).is_some() {
                return Err(Error::validation(format!(
                    "duplicate slice id {:?}",
                    slice.id
                )));
            }
            if slice.token_count() == 0 {
                return Err(Error::validation(format!(
                    "empty slice {:?} (no tokens)",
                    slice.id
                )));
            }
        }
        Ok(SlicedCorpus { slices })
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    /// Number of slices T.
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.slices.iter().map(|s| s.id.clone()).collect()
    }

    pub fn slice(&self, idx: usize) -> &Slice {
        &self.slices[idx]
    }

    pub fn slice_by_id(&self, id: &str) -> Option<&Slice> {
        self.slices.iter().find(|s| s.id == id)
    }
}

/// Slice labels end up in TSV headers and file names; keep them printable.
pub(crate) fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::validation("empty slice id"));
    }
    if label.chars().any(|c| c.is_control()) {
        return Err(Error::validation(format!(
            "slice id {label:?} contains control characters"
        )));
    }
    Ok(())
}

/// Read a corpus from `path` in the given format.
pub fn ingest_corpus(path: &Path, format: CorpusFormat) -> Result<SlicedCorpus> {
    match format {
        CorpusFormat::Jsonl => ingest_jsonl(path),
        CorpusFormat::SliceDirs => ingest_slice_dirs(path),
    }
}

#[derive(Deserialize)]
struct JsonlRecord {
    slice: String,
    tokens: Vec<String>,
}

fn ingest_jsonl(path: &Path) -> Result<SlicedCorpus> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);

    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, Vec<Vec<String>>> = HashMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord =
            serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        if !by_id.contains_key(&record.slice) {
            order.push(record.slice.clone());
        }
        by_id.entry(record.slice).or_default().push(record.tokens);
    }

    let slices = order
        .into_iter()
        .map(|id| {
            let documents = by_id.remove(&id).unwrap();
            Slice { id, documents }
        })
        .collect();
    SlicedCorpus::new(slices)
}

fn ingest_slice_dirs(path: &Path) -> Result<SlicedCorpus> {
    let mut dirs: Vec<_> = std::fs::read_dir(path)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|e| e.path().is_dir())
        .collect();
    dirs.sort_by_key(|e| e.file_name());

    let mut slices = Vec::new();
    for dir in dirs {
        let id = dir.file_name().to_string_lossy().into_owned();
        let mut files: Vec<_> = std::fs::read_dir(dir.path())?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .filter(|e| e.path().is_file())
            .collect();
        files.sort_by_key(|e| e.file_name());

        let mut documents = Vec::new();
        for file in files {
            let reader = BufReader::new(File::open(file.path())?);
            for line in reader.lines() {
                let line = line?;
                let tokens: Vec<String> =
                    line.split_whitespace().map(str::to_owned).collect();
                if !tokens.is_empty() {
                    documents.push(tokens);
                }
            }
        }
        slices.push(Slice { id, documents });
    }
    SlicedCorpus::new(slices)
}
