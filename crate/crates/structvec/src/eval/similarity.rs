//! Word-similarity correlation tests: human scores against embedding
//! cosines.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::neighbors::cosine;
use crate::eval::stats::{pearson_r, spearman};
use crate::vocab::Vocabulary;

/// Word pairs with human similarity judgments.
#[derive(Debug, Clone)]
pub struct SimilarityDataset {
    pub pairs: Vec<(String, String, f64)>,
}

impl SimilarityDataset {
    /// TSV columns: word1, word2, score.
    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut pairs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected 3 tab-separated fields, found {}", parts.len()),
                });
            }
            let score: f64 = parts[2].parse().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("bad score: {e}"),
            })?;
            if !score.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("score must be finite, got {score}"),
                });
            }
            pairs.push((parts[0].to_owned(), parts[1].to_owned(), score));
        }
        if pairs.is_empty() {
            return Err(Error::validation(format!(
                "{} contains no similarity pairs",
                path.display()
            )));
        }
        Ok(SimilarityDataset { pairs })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Spearman,
    Pearson,
}

impl std::str::FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spearman" => Ok(CorrelationMethod::Spearman),
            "pearson" => Ok(CorrelationMethod::Pearson),
            other => Err(Error::Config(format!(
                "unknown correlation method {other:?} (expected \"spearman\" or \"pearson\")"
            ))),
        }
    }
}

/// Correlation between human scores and embedding cosines over the pairs
/// with both words in vocabulary; returns `(coefficient, coverage)`.
pub fn similarity_correlation(
    embedding: &Array2<f64>,
    vocab: &Vocabulary,
    dataset: &SimilarityDataset,
    method: CorrelationMethod,
) -> Result<(f64, f64)> {
    if embedding.nrows() != vocab.len() {
        return Err(Error::validation(format!(
            "embedding has {} rows for a vocabulary of {}",
            embedding.nrows(),
            vocab.len()
        )));
    }
    let mut human = Vec::new();
    let mut cosines = Vec::new();
    for (w1, w2, score) in &dataset.pairs {
        let (Some(i), Some(j)) = (vocab.index_of(w1), vocab.index_of(w2)) else {
            continue;
        };
        human.push(*score);
        cosines.push(cosine(embedding.row(i), embedding.row(j)));
    }
    if human.len() < 2 {
        return Err(Error::validation(format!(
            "only {} scorable pairs; need at least 2",
            human.len()
        )));
    }
    let coefficient = match method {
        CorrelationMethod::Spearman => spearman(&cosines, &human)?,
        CorrelationMethod::Pearson => pearson_r(&cosines, &human)?,
    };
    let coverage = human.len() as f64 / dataset.pairs.len() as f64;
    Ok((coefficient, coverage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Slice, SlicedCorpus};
    use crate::vocab::{build_vocabulary, VocabParams};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn vocab(words: &[&str]) -> Vocabulary {
        let doc: Vec<String> = words.iter().map(|w| (*w).to_owned()).collect();
        let corpus = SlicedCorpus::new(vec![
            Slice { id: "a".into(), documents: vec![doc.clone()] },
            Slice { id: "b".into(), documents: vec![doc] },
        ])
        .unwrap();
        build_vocabulary(
            &corpus,
            &VocabParams {
                global_top_k: 100,
                slice_top_k: 100,
                min_slices: 2,
                stopword_top: 0,
            },
        )
        .unwrap()
    }

    fn dataset(pairs: &[(&str, &str, f64)]) -> SimilarityDataset {
        SimilarityDataset {
            pairs: pairs
                .iter()
                .map(|(a, b, s)| ((*a).to_owned(), (*b).to_owned(), *s))
                .collect(),
        }
    }

    fn toy_embedding(v: &Vocabulary) -> Array2<f64> {
        // a=(1,0), b=(0.8,0.6), c=(0,1), d=(-1,0)
        let mut m = Array2::zeros((4, 2));
        m.row_mut(v.index_of("a").unwrap()).assign(&ndarray::arr1(&[1.0, 0.0]));
        m.row_mut(v.index_of("b").unwrap()).assign(&ndarray::arr1(&[0.8, 0.6]));
        m.row_mut(v.index_of("c").unwrap()).assign(&ndarray::arr1(&[0.0, 1.0]));
        m.row_mut(v.index_of("d").unwrap()).assign(&ndarray::arr1(&[-1.0, 0.0]));
        m
    }

    #[test]
    fn exact_cosine_scores_give_perfect_correlation() {
        let v = vocab(&["a", "b", "c", "d"]);
        let m = toy_embedding(&v);
        // human scores equal to the actual cosines
        let ds = dataset(&[("a", "b", 0.8), ("a", "c", 0.0), ("a", "d", -1.0)]);
        for method in [CorrelationMethod::Spearman, CorrelationMethod::Pearson] {
            let (r, coverage) = similarity_correlation(&m, &v, &ds, method).unwrap();
            assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
            assert_eq!(coverage, 1.0);
        }
    }

    #[test]
    fn reversed_scores_give_minus_one() {
        let v = vocab(&["a", "b", "c", "d"]);
        let m = toy_embedding(&v);
        let ds = dataset(&[("a", "b", -0.8), ("a", "c", 0.0), ("a", "d", 1.0)]);
        for method in [CorrelationMethod::Spearman, CorrelationMethod::Pearson] {
            let (r, _) = similarity_correlation(&m, &v, &ds, method).unwrap();
            assert_abs_diff_eq!(r, -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn oov_pair_drops_into_coverage() {
        let v = vocab(&["a", "b", "c", "d"]);
        let m = toy_embedding(&v);
        // ranks by cosine: (a,b) > (a,c) > (a,d); human agrees -> rho = 1
        let ds = dataset(&[
            ("a", "b", 9.0),
            ("a", "c", 5.0),
            ("a", "d", 1.0),
            ("a", "missing", 3.0),
        ]);
        let (r, coverage) =
            similarity_correlation(&m, &v, &ds, CorrelationMethod::Spearman).unwrap();
        assert_eq!(coverage, 0.75);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fewer_than_two_scorable_pairs_is_an_error() {
        let v = vocab(&["a", "b"]);
        let m = array![[1.0, 0.0], [0.0, 1.0]];
        let ds = dataset(&[("a", "b", 1.0), ("a", "missing", 2.0)]);
        assert!(similarity_correlation(&m, &v, &ds, CorrelationMethod::Spearman).is_err());
    }
}
