//! Nearest neighbors and drift timelines.

use ndarray::{Array2, ArrayView1};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

/// Cosine similarity, clamped to `[-1, 1]`; zero vectors compare as 0.
pub fn cosine(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let dot: f64 = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
    let norm_a: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        0.0
    } else {
        (dot / (norm_a * norm_b)).clamp(-1.0, 1.0)
    }
}

/// The `n` most cosine-similar vocabulary words to `query`, query excluded,
/// ties broken by vocabulary index.
pub fn nearest_neighbors(
    embedding: &Array2<f64>,
    vocab: &Vocabulary,
    query: &str,
    n: usize,
) -> Result<Vec<(String, f64)>> {
    let q = vocab
        .index_of(query)
        .ok_or_else(|| Error::OutOfVocabulary(query.to_owned()))?;
    if embedding.nrows() != vocab.len() {
        return Err(Error::validation(format!(
            "embedding has {} rows for a vocabulary of {}",
            embedding.nrows(),
            vocab.len()
        )));
    }
    if n >= vocab.len() {
        return Err(Error::validation(format!(
            "n ({n}) must be smaller than V ({})",
            vocab.len()
        )));
    }

    let query_row = embedding.row(q);
    let mut scored: Vec<(usize, f64)> = (0..vocab.len())
        .filter(|&i| i != q)
        .map(|i| (i, cosine(query_row, embedding.row(i))))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("cosines are finite").then(a.0.cmp(&b.0)));
    Ok(scored
        .into_iter()
        .take(n)
        .map(|(i, sim)| (vocab.word(i).to_owned(), sim))
        .collect())
}

/// Slice-by-neighbor table of cosine similarities against a target word.
#[derive(Debug, Clone)]
pub struct TimelineTable {
    pub target: String,
    pub slices: Vec<String>,
    pub neighbors: Vec<String>,
    /// `values[[t, j]]` is the cosine between the target and neighbor `j`
    /// within slice `t`.
    pub values: Array2<f64>,
}

/// Cosine similarity between `target` and each neighbor word, per slice.
pub fn drift_timeline(
    embeddings: &EmbeddingSet,
    vocab: &Vocabulary,
    target: &str,
    neighbors: &[String],
) -> Result<TimelineTable> {
    let target_idx = vocab
        .index_of(target)
        .ok_or_else(|| Error::OutOfVocabulary(target.to_owned()))?;
    if neighbors.is_empty() {
        return Err(Error::validation("no neighbor words given"));
    }
    let neighbor_idx: Vec<usize> = neighbors
        .iter()
        .map(|w| {
            vocab
                .index_of(w)
                .ok_or_else(|| Error::OutOfVocabulary(w.clone()))
        })
        .collect::<Result<_>>()?;

    let mut values = Array2::zeros((embeddings.len(), neighbors.len()));
    for t in 0..embeddings.len() {
        let matrix = embeddings.matrix(t);
        for (j, &idx) in neighbor_idx.iter().enumerate() {
            values[[t, j]] = cosine(matrix.row(target_idx), matrix.row(idx));
        }
    }
    Ok(TimelineTable {
        target: target.to_owned(),
        slices: embeddings.labels().to_vec(),
        neighbors: neighbors.to_vec(),
        values,
    })
}

/// Pick timeline neighbors automatically: find the two slices where the
/// target's vectors are farthest apart, then take the target's `per_slice`
/// nearest neighbors in each of those slices (deduplicated, order kept).
pub fn auto_drift_neighbors(
    embeddings: &EmbeddingSet,
    vocab: &Vocabulary,
    target: &str,
    per_slice: usize,
) -> Result<Vec<String>> {
    let target_idx = vocab
        .index_of(target)
        .ok_or_else(|| Error::OutOfVocabulary(target.to_owned()))?;
    let t_count = embeddings.len();
    if t_count < 2 {
        return Err(Error::validation("need at least 2 slices"));
    }

    let mut best = (0, 1, f64::NEG_INFINITY);
    for a in 0..t_count {
        for b in a + 1..t_count {
            let va = embeddings.matrix(a).row(target_idx);
            let vb = embeddings.matrix(b).row(target_idx);
            let dist: f64 = va
                .iter()
                .zip(vb.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if dist > best.2 {
                best = (a, b, dist);
            }
        }
    }

    let mut out: Vec<String> = Vec::new();
    for slice in [best.0, best.1] {
        for (word, _) in nearest_neighbors(embeddings.matrix(slice), vocab, target, per_slice)? {
            if !out.contains(&word) {
                out.push(word);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Slice, SlicedCorpus};
    use crate::vocab::{build_vocabulary, VocabParams};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn vocab(words: &[&str]) -> Vocabulary {
        // every word once per slice, two slices; lexicographic tie-break
        // makes the index order the sorted word order
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

    #[test]
    fn duplicate_vector_is_the_top_neighbor() {
        let v = vocab(&["x", "y", "z"]);
        // x duplicates y's vector
        let mut m = Array2::zeros((3, 2));
        let (x, y, z) = (
            v.index_of("x").unwrap(),
            v.index_of("y").unwrap(),
            v.index_of("z").unwrap(),
        );
        m.row_mut(x).assign(&ndarray::arr1(&[1.0, 2.0]));
        m.row_mut(y).assign(&ndarray::arr1(&[1.0, 2.0]));
        m.row_mut(z).assign(&ndarray::arr1(&[-2.0, 1.0]));
        let result = nearest_neighbors(&m, &v, "x", 2).unwrap();
        assert_eq!(result[0].0, "y");
        assert_abs_diff_eq!(result[0].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_one_hot_vectors_have_zero_similarity() {
        let v = vocab(&["x", "y", "z"]);
        let m = Array2::eye(3);
        for (_, sim) in nearest_neighbors(&m, &v, "x", 2).unwrap() {
            assert_eq!(sim, 0.0);
        }
    }

    #[test]
    fn three_word_ranking_matches_hand_cosines() {
        let v = vocab(&["a", "b", "c"]); // indexes: a=0, b=1, c=2
        let m = array![[1.0, 0.0], [0.8, 0.6], [0.0, 1.0]];
        // cos(a,b) = 0.8, cos(a,c) = 0.0
        let result = nearest_neighbors(&m, &v, "a", 2).unwrap();
        assert_eq!(result[0].0, "b");
        assert_abs_diff_eq!(result[0].1, 0.8, epsilon = 1e-12);
        assert_eq!(result[1].0, "c");
        assert_abs_diff_eq!(result[1].1, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn oov_query_is_a_plain_error() {
        let v = vocab(&["a", "b"]);
        let m = Array2::zeros((2, 2));
        let err = nearest_neighbors(&m, &v, "missing", 1).unwrap_err();
        assert_eq!(err.category(), "oov");
    }

    #[test]
    fn static_embeddings_give_constant_timeline_rows() {
        let v = vocab(&["a", "b", "c"]);
        let m = array![[1.0, 0.0], [0.8, 0.6], [0.0, 1.0]];
        let e = EmbeddingSet::new(
            vec!["t1".into(), "t2".into(), "t3".into()],
            vec![m.clone(), m.clone(), m],
            None,
        )
        .unwrap();
        let table = drift_timeline(&e, &v, "a", &["b".into(), "c".into()]).unwrap();
        for j in 0..2 {
            let first = table.values[[0, j]];
            for t in 1..3 {
                assert_eq!(table.values[[t, j]], first);
            }
        }
        assert_abs_diff_eq!(table.values[[0, 0]], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn target_equal_to_neighbor_reads_one() {
        let v = vocab(&["a", "b"]);
        let m1 = array![[1.0, 1.0], [1.0, 1.0]];
        let m2 = array![[1.0, 0.0], [0.0, 1.0]];
        let e = EmbeddingSet::new(vec!["t1".into(), "t2".into()], vec![m1, m2], None).unwrap();
        let table = drift_timeline(&e, &v, "a", &["b".into()]).unwrap();
        assert_abs_diff_eq!(table.values[[0, 0]], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(table.values[[1, 0]], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn timeline_values_match_hand_cosines_on_a_drift_instance() {
        let v = vocab(&["a", "b", "c"]);
        let m1 = array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let m2 = array![[0.6, 0.8], [1.0, 0.0], [0.0, 1.0]];
        let m3 = array![[0.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        let e = EmbeddingSet::new(
            vec!["t1".into(), "t2".into(), "t3".into()],
            vec![m1, m2, m3],
            None,
        )
        .unwrap();
        let table = drift_timeline(&e, &v, "a", &["b".into(), "c".into()]).unwrap();
        // hand cosines for target a against b: 1.0, 0.6, 0.0
        assert_abs_diff_eq!(table.values[[0, 0]], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(table.values[[1, 0]], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(table.values[[2, 0]], 0.0, epsilon = 1e-12);
        // and against c: 0.0, 0.8, 1.0
        assert_abs_diff_eq!(table.values[[0, 1]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(table.values[[1, 1]], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(table.values[[2, 1]], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn auto_neighbors_use_the_farthest_slice_pair() {
        let v = vocab(&["a", "b", "c"]);
        let m1 = array![[1.0, 0.0], [1.0, 0.1], [0.0, 1.0]];
        let m2 = array![[0.9, 0.1], [1.0, 0.1], [0.0, 1.0]];
        let m3 = array![[0.0, 1.0], [1.0, 0.1], [0.1, 1.0]];
        let e = EmbeddingSet::new(
            vec!["t1".into(), "t2".into(), "t3".into()],
            vec![m1, m2, m3],
            None,
        )
        .unwrap();
        // farthest pair for "a" is (t1, t3); nearest neighbor of a in t1 is b,
        // in t3 it is c
        let picks = auto_drift_neighbors(&e, &v, "a", 1).unwrap();
        assert_eq!(picks, vec!["b".to_string(), "c".to_string()]);
    }
}
