//! Analogy tests, general and cross-slice.
//!
//! A general analogy `a : b :: c : d` is answered by ranking the vocabulary
//! against `v(b) - v(a) + v(c)` by cosine; it is a hit when `d` appears among
//! the top n. A cross-slice analogy asks for `word_b` in slice `slice_b`
//! given the vector of `word_a` taken from slice `slice_a`.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

/// Quadruples grouped by named section (the conventional text format with
/// `:`-prefixed section headers and four tokens per line).
#[derive(Debug, Clone)]
pub struct AnalogyTestSet {
    pub sections: Vec<AnalogySection>,
}

#[derive(Debug, Clone)]
pub struct AnalogySection {
    pub name: String,
    pub quadruples: Vec<[String; 4]>,
}

impl AnalogyTestSet {
    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut sections: Vec<AnalogySection> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix(':') {
                sections.push(AnalogySection {
                    name: name.trim().to_owned(),
                    quadruples: Vec::new(),
                });
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 4 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected 4 tokens, found {}", tokens.len()),
                });
            }
            if sections.is_empty() {
                sections.push(AnalogySection {
                    name: "default".to_owned(),
                    quadruples: Vec::new(),
                });
            }
            sections
                .last_mut()
                .unwrap()
                .quadruples
                .push([tokens[0].into(), tokens[1].into(), tokens[2].into(), tokens[3].into()]);
        }
        sections.retain(|s| !s.quadruples.is_empty());
        let set = AnalogyTestSet { sections };
        if set.total() == 0 {
            return Err(Error::validation(format!(
                "{} contains no analogy quadruples",
                path.display()
            )));
        }
        Ok(set)
    }

    pub fn total(&self) -> usize {
        self.sections.iter().map(|s| s.quadruples.len()).sum()
    }

    pub fn iter_quadruples(&self) -> impl Iterator<Item = (&str, &[String; 4])> + '_ {
        self.sections
            .iter()
            .flat_map(|s| s.quadruples.iter().map(move |q| (s.name.as_str(), q)))
    }
}

/// Protocol switches. `exclude_inputs` removes a, b and c from the candidate
/// set (on by default, the standard protocol).
#[derive(Debug, Clone, Copy)]
pub struct AnalogyProtocol {
    pub exclude_inputs: bool,
}

impl Default for AnalogyProtocol {
    fn default() -> Self {
        AnalogyProtocol {
            exclude_inputs: true,
        }
    }
}

/// Rows scaled to unit norm (zero rows stay zero), so ranking by dot product
/// equals ranking by cosine.
pub(crate) fn normalize_rows(matrix: &Array2<f64>) -> Array2<f64> {
    let mut out = matrix.clone();
    for mut row in out.rows_mut() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|x| x / norm);
        }
    }
    out
}

/// Cosine rank of `target` among all rows except `excluded`; rank 1 is the
/// most similar, ties are broken by the smaller row index.
fn cosine_rank(
    normalized: &Array2<f64>,
    query: ArrayView1<f64>,
    target: usize,
    excluded: &[usize],
) -> usize {
    let sims: Array1<f64> = normalized.dot(&query);
    let target_sim = sims[target];
    let mut rank = 1;
    for (i, &sim) in sims.iter().enumerate() {
        if i == target || excluded.contains(&i) {
            continue;
        }
        if sim > target_sim || (sim == target_sim && i < target) {
            rank += 1;
        }
    }
    rank
}

/// Accuracy at each requested n plus coverage, overall and per section.
#[derive(Debug, Clone)]
pub struct AnalogyOutcome {
    pub ns: Vec<usize>,
    /// Overall accuracy per entry of `ns`.
    pub accuracy: Vec<f64>,
    pub hits: Vec<usize>,
    pub total: usize,
    pub scored: usize,
    pub coverage: f64,
    pub sections: Vec<SectionOutcome>,
}

#[derive(Debug, Clone)]
pub struct SectionOutcome {
    pub name: String,
    pub accuracy: Vec<f64>,
    pub total: usize,
    pub scored: usize,
}

/// Per-quadruple cosine rank of d, or `None` when any of the four words is
/// out of vocabulary.
pub fn analogy_ranks(
    embedding: &Array2<f64>,
    vocab: &Vocabulary,
    tests: &AnalogyTestSet,
    protocol: &AnalogyProtocol,
) -> Result<Vec<Option<usize>>> {
    if embedding.nrows() != vocab.len() {
        return Err(Error::validation(format!(
            "embedding has {} rows for a vocabulary of {}",
            embedding.nrows(),
            vocab.len()
        )));
    }
    let normalized = normalize_rows(embedding);
    let mut ranks = Vec::with_capacity(tests.total());
    for (_, quad) in tests.iter_quadruples() {
        let idx: Option<Vec<usize>> = quad.iter().map(|w| vocab.index_of(w)).collect();
        let Some(idx) = idx else {
            ranks.push(None);
            continue;
        };
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let query = &embedding.row(b) - &embedding.row(a) + &embedding.row(c);
        let norm = query.iter().map(|x| x * x).sum::<f64>().sqrt();
        let query = if norm > 0.0 { query / norm } else { query };
        let excluded: Vec<usize> = if protocol.exclude_inputs {
            vec![a, b, c].into_iter().filter(|&i| i != d).collect()
        } else {
            Vec::new()
        };
        ranks.push(Some(cosine_rank(&normalized, query.view(), d, &excluded)));
    }
    Ok(ranks)
}

/// Score a test set at several n values in one pass.
pub fn evaluate_analogies(
    embedding: &Array2<f64>,
    vocab: &Vocabulary,
    tests: &AnalogyTestSet,
    ns: &[usize],
    protocol: &AnalogyProtocol,
) -> Result<AnalogyOutcome> {
    if ns.is_empty() {
        return Err(Error::validation("no n values requested"));
    }
    let ranks = analogy_ranks(embedding, vocab, tests, protocol)?;
    let total = ranks.len();
    let scored = ranks.iter().flatten().count();
    if scored == 0 {
        return Err(Error::validation(
            "no scorable quadruples: every test has an out-of-vocabulary word",
        ));
    }

    let mut sections = Vec::new();
    let mut offset = 0;
    for section in &tests.sections {
        let slice = &ranks[offset..offset + section.quadruples.len()];
        offset += section.quadruples.len();
        let sec_scored = slice.iter().flatten().count();
        let accuracy = ns
            .iter()
            .map(|&n| {
                if sec_scored == 0 {
                    0.0
                } else {
                    let hits = slice.iter().flatten().filter(|&&r| r <= n).count();
                    hits as f64 / sec_scored as f64
                }
            })
            .collect();
        sections.push(SectionOutcome {
            name: section.name.clone(),
            accuracy,
            total: section.quadruples.len(),
            scored: sec_scored,
        });
    }

    let hits: Vec<usize> = ns
        .iter()
        .map(|&n| ranks.iter().flatten().filter(|&&r| r <= n).count())
        .collect();
    let accuracy = hits.iter().map(|&h| h as f64 / scored as f64).collect();
    Ok(AnalogyOutcome {
        ns: ns.to_vec(),
        accuracy,
        hits,
        total,
        scored,
        coverage: scored as f64 / total as f64,
        sections,
    })
}

/// Accuracy and coverage at a single n under the default protocol.
pub fn analogy_accuracy(
    embedding: &Array2<f64>,
    vocab: &Vocabulary,
    tests: &AnalogyTestSet,
    n: usize,
) -> Result<(f64, f64)> {
    let outcome = evaluate_analogies(embedding, vocab, tests, &[n], &AnalogyProtocol::default())?;
    Ok((outcome.accuracy[0], outcome.coverage))
}

/// One cross-slice test: infer `word_b` in `slice_b` from `word_a`'s vector
/// in `slice_a`.
#[derive(Debug, Clone)]
pub struct CrossSliceTest {
    pub slice_a: String,
    pub word_a: String,
    pub slice_b: String,
    pub word_b: String,
}

#[derive(Debug, Clone)]
pub struct CrossSliceAnalogySet {
    pub tests: Vec<CrossSliceTest>,
}

impl CrossSliceAnalogySet {
    /// TSV columns: slice_a, word_a, slice_b, word_b.
    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut tests = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 4 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected 4 tab-separated fields, found {}", parts.len()),
                });
            }
            tests.push(CrossSliceTest {
                slice_a: parts[0].to_owned(),
                word_a: parts[1].to_owned(),
                slice_b: parts[2].to_owned(),
                word_b: parts[3].to_owned(),
            });
        }
        if tests.is_empty() {
            return Err(Error::validation(format!(
                "{} contains no cross-slice tests",
                path.display()
            )));
        }
        Ok(CrossSliceAnalogySet { tests })
    }
}

/// Cross-slice accuracy: the query vector is `word_a`'s row in `slice_a`,
/// candidates are all rows of `slice_b` except `word_a`, hit when `word_b`
/// ranks within n. Out-of-vocabulary words skip the test (counted in
/// coverage); unknown slices are hard errors.
pub fn evaluate_cross_slice(
    embeddings: &EmbeddingSet,
    vocab: &Vocabulary,
    tests: &CrossSliceAnalogySet,
    ns: &[usize],
) -> Result<AnalogyOutcome> {
    if ns.is_empty() {
        return Err(Error::validation("no n values requested"));
    }
    if embeddings.v() != vocab.len() {
        return Err(Error::validation(format!(
            "embeddings have V={} for a vocabulary of {}",
            embeddings.v(),
            vocab.len()
        )));
    }
    let normalized: Vec<Array2<f64>> = (0..embeddings.len())
        .map(|t| normalize_rows(embeddings.matrix(t)))
        .collect();

    let mut ranks: Vec<Option<usize>> = Vec::with_capacity(tests.tests.len());
    for test in &tests.tests {
        let slice_a = embeddings.label_index(&test.slice_a).ok_or_else(|| {
            Error::validation(format!("unknown slice {:?}", test.slice_a))
        })?;
        let slice_b = embeddings.label_index(&test.slice_b).ok_or_else(|| {
            Error::validation(format!("unknown slice {:?}", test.slice_b))
        })?;
        let (Some(word_a), Some(word_b)) =
            (vocab.index_of(&test.word_a), vocab.index_of(&test.word_b))
        else {
            ranks.push(None);
            continue;
        };
        let query = embeddings.matrix(slice_a).row(word_a);
        let norm = query.iter().map(|x| x * x).sum::<f64>().sqrt();
        let query: Array1<f64> = if norm > 0.0 {
            query.mapv(|x| x / norm)
        } else {
            query.to_owned()
        };
        let excluded = if word_a == word_b { vec![] } else { vec![word_a] };
        ranks.push(Some(cosine_rank(
            &normalized[slice_b],
            query.view(),
            word_b,
            &excluded,
        )));
    }

    let total = ranks.len();
    let scored = ranks.iter().flatten().count();
    if scored == 0 {
        return Err(Error::validation(
            "no scorable cross-slice tests: every test has an out-of-vocabulary word",
        ));
    }
    let hits: Vec<usize> = ns
        .iter()
        .map(|&n| ranks.iter().flatten().filter(|&&r| r <= n).count())
        .collect();
    let accuracy = hits.iter().map(|&h| h as f64 / scored as f64).collect();
    Ok(AnalogyOutcome {
        ns: ns.to_vec(),
        accuracy,
        hits,
        total,
        scored,
        coverage: scored as f64 / total as f64,
        sections: Vec::new(),
    })
}

/// Accuracy and coverage at a single n.
pub fn cross_slice_accuracy(
    embeddings: &EmbeddingSet,
    vocab: &Vocabulary,
    tests: &CrossSliceAnalogySet,
    n: usize,
) -> Result<(f64, f64)> {
    let outcome = evaluate_cross_slice(embeddings, vocab, tests, &[n])?;
    Ok((outcome.accuracy[0], outcome.coverage))
}
