//! Joint vocabulary construction.
//!
//! A word enters the vocabulary when it is (1) among the `global_top_k` most
//! frequent words of the whole corpus, (2) among the `slice_top_k` most
//! frequent words in at least `min_slices` slices, and (3) not among the
//! `stopword_top` most frequent words of the whole corpus. Frequency ties are
//! broken lexicographically so the result is a pure function of the input.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::SlicedCorpus;
use crate::error::{Error, Result};

pub const VOCAB_HEADER: &str = "#structvec-vocab v1";

/// Frequency thresholds controlling vocabulary selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabParams {
    pub global_top_k: usize,
    pub slice_top_k: usize,
    pub min_slices: usize,
    /// Number of globally most frequent words removed as stop words.
    /// Zero disables stopword removal.
    pub stopword_top: usize,
}

impl Default for VocabParams {
    fn default() -> Self {
        VocabParams {
            global_top_k: 20_000,
            slice_top_k: 20_000,
            min_slices: 3,
            stopword_top: 100,
        }
    }
}

impl VocabParams {
    pub fn validate(&self) -> Result<()> {
        if self.global_top_k == 0 || self.slice_top_k == 0 || self.min_slices == 0 {
            return Err(Error::validation(
                "global_top_k, slice_top_k and min_slices must be positive",
            ));
        }
        if self.stopword_top >= self.global_top_k {
            return Err(Error::validation(format!(
                "stopword_top ({}) must be smaller than global_top_k ({})",
                self.stopword_top, self.global_top_k
            )));
        }
        Ok(())
    }
}

/// Immutable word list with index map and global counts.
///
/// Indexes cover exactly `[0, V)`; word order is descending global frequency
/// with lexicographic tie-breaking.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    global_counts: Vec<u64>,
}

impl Vocabulary {
    fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation("vocabulary is empty"));
        }
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut global_counts = Vec::with_capacity(entries.len());
        for (i, (word, count)) in entries.into_iter().enumerate() {
            if index.insert(word.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate word {word:?}")));
            }
            words.push(word);
            global_counts.push(count);
        }
        Ok(Vocabulary {
            words,
            index,
            global_counts,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn global_count(&self, idx: usize) -> u64 {
        self.global_counts[idx]
    }

    /// Canonical TSV serialization; `save` writes exactly these bytes, so the
    /// in-memory fingerprint equals the fingerprint of the saved file.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(VOCAB_HEADER);
        out.push('\n');
        for (i, word) in self.words.iter().enumerate() {
            writeln!(out, "{word}\t{i}\t{}", self.global_counts[i]).unwrap();
        }
        out
    }

    /// SHA-256 of the canonical TSV form, hex-encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_tsv().as_bytes());
        hex::encode(hasher.finalize())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = File::create(path)?;
        file.write_all(self.to_tsv().as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines().enumerate();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };

        match lines.next() {
            Some((_, Ok(header))) if header == VOCAB_HEADER => {}
            Some((_, Ok(header))) => {
                return Err(parse_err(1, format!("unexpected header {header:?}")))
            }
            Some((_, Err(e))) => return Err(e.into()),
            None => return Err(parse_err(1, "empty vocabulary file".into())),
        }

        let mut rows = Vec::new();
        for (lineno, line) in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let word = parts
                .next()
                .ok_or_else(|| parse_err(lineno + 1, "missing word column".into()))?;
            let idx: usize = parts
                .next()
                .ok_or_else(|| parse_err(lineno + 1, "missing index column".into()))?
                .parse()
                .map_err(|e| parse_err(lineno + 1, format!("bad index: {e}")))?;
            let count: u64 = parts
                .next()
                .ok_or_else(|| parse_err(lineno + 1, "missing count column".into()))?
                .parse()
                .map_err(|e| parse_err(lineno + 1, format!("bad count: {e}")))?;
            rows.push((idx, word.to_owned(), count));
        }

        rows.sort_by_key(|(idx, _, _)| *idx);
        for (expected, (idx, _, _)) in rows.iter().enumerate() {
            if *idx != expected {
                return Err(Error::validation(format!(
                    "vocabulary indexes must cover [0, V) exactly; found index {idx} at position {expected}"
                )));
            }
        }
        Vocabulary::from_entries(rows.into_iter().map(|(_, w, c)| (w, c)).collect())
    }
}

/// SHA-256 of a vocabulary file's raw bytes, hex-encoded.
pub fn file_fingerprint(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

/// Words ranked by descending count, lexicographic within equal counts.
fn ranked<'a>(counts: &HashMap<&'a str, u64>) -> Vec<(&'a str, u64)> {
    let mut items: Vec<(&str, u64)> = counts.iter().map(|(w, c)| (*w, *c)).collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    items
}

/// Apply the frequency rules to a corpus.
pub fn build_vocabulary(corpus: &SlicedCorpus, params: &VocabParams) -> Result<Vocabulary> {
    params.validate()?;

    let mut global: HashMap<&str, u64> = HashMap::new();
    for slice in corpus.slices() {
        for doc in &slice.documents {
            for token in doc {
                *global.entry(token.as_str()).or_insert(0) += 1;
            }
        }
    }

    let global_ranked = ranked(&global);
    let candidates: HashSet<&str> = global_ranked
        .iter()
        .take(params.global_top_k)
        .map(|(w, _)| *w)
        .collect();
    let stopwords: HashSet<&str> = global_ranked
        .iter()
        .take(params.stopword_top)
        .map(|(w, _)| *w)
        .collect();

    // Slice ranks are computed on raw counts, before stopword removal.
    let mut presence: HashMap<&str, usize> = HashMap::new();
    for slice in corpus.slices() {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in &slice.documents {
            for token in doc {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        for (word, _) in ranked(&counts).into_iter().take(params.slice_top_k) {
            *presence.entry(word).or_insert(0) += 1;
        }
    }

    let entries: Vec<(String, u64)> = global_ranked
        .iter()
        .filter(|(w, _)| {
            candidates.contains(w)
                && presence.get(w).copied().unwrap_or(0) >= params.min_slices
                && !stopwords.contains(w)
        })
        .map(|(w, c)| ((*w).to_owned(), *c))
        .collect();

    Vocabulary::from_entries(entries)
}
