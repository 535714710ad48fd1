//! Co-occurrence counting with a symmetric context window.
//!
//! For every in-vocabulary token, every in-vocabulary token within `window`
//! positions on either side (inside the same document) increments the
//! directed pair count by one. Out-of-vocabulary tokens keep their positions
//! but contribute no pairs, and windows never cross document boundaries.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Slice;
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

/// Counting options. Distance weighting (weight `1/distance` instead of 1)
/// is off by default; plain integer counts are the contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountParams {
    pub window: usize,
    pub distance_weighting: bool,
}

impl Default for CountParams {
    fn default() -> Self {
        CountParams {
            window: 5,
            distance_weighting: false,
        }
    }
}

impl CountParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::validation("window must be at least 1"));
        }
        Ok(())
    }
}

/// Sparse directed pair counts for one slice.
///
/// Values are exact integers unless distance weighting was requested.
/// Marginals equal row sums, and the matrix is symmetric because the
/// window is symmetric.
#[derive(Debug, Clone)]
pub struct CooccurrenceCounts {
    pub slice_id: String,
    v: usize,
    /// Per-row `(column, count)` pairs, sorted by column.
    rows: Vec<Vec<(u32, f64)>>,
    total: f64,
    marginals: Vec<f64>,
}

impl CooccurrenceCounts {
    pub fn v(&self) -> usize {
        self.v
    }

    /// Total pair count |D|.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn marginal(&self, word: usize) -> f64 {
        self.marginals[word]
    }

    pub fn marginals(&self) -> &[f64] {
        &self.marginals
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.rows[i].binary_search_by_key(&(j as u32), |&(c, _)| c) {
            Ok(pos) => self.rows[i][pos].1,
            Err(_) => 0.0,
        }
    }

    /// Multiply every count by a positive factor (totals and marginals scale
    /// with it, so PPMI is unchanged).
    pub fn scaled(&self, factor: f64) -> CooccurrenceCounts {
        CooccurrenceCounts {
            slice_id: self.slice_id.clone(),
            v: self.v,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(c, x)| (c, x * factor)).collect())
                .collect(),
            total: self.total * factor,
            marginals: self.marginals.iter().map(|&m| m * factor).collect(),
        }
    }

    /// Build counts directly from triplets; test and tooling entry point.
    pub fn from_triplets(
        slice_id: impl Into<String>,
        v: usize,
        triplets: &[(u32, u32, f64)],
    ) -> Result<CooccurrenceCounts> {
        let mut rows: Vec<HashMap<u32, f64>> = vec![HashMap::new(); v];
        for &(i, j, x) in triplets {
            if i as usize >= v || j as usize >= v {
                return Err(Error::validation(format!(
                    "triplet ({i}, {j}) out of range for V={v}"
                )));
            }
            if x < 0.0 || !x.is_finite() {
                return Err(Error::validation(format!(
                    "count for ({i}, {j}) must be finite and nonnegative, got {x}"
                )));
            }
            *rows[i as usize].entry(j).or_insert(0.0) += x;
        }
        Ok(finish_counts(slice_id.into(), v, rows))
    }
}

fn finish_counts(
    slice_id: String,
    v: usize,
    accum: Vec<HashMap<u32, f64>>,
) -> CooccurrenceCounts {
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(v);
    let mut marginals = vec![0.0; v];
    let mut total = 0.0;
    for (i, map) in accum.into_iter().enumerate() {
        let mut row: Vec<(u32, f64)> = map.into_iter().filter(|&(_, x)| x > 0.0).collect();
        row.sort_by_key(|&(c, _)| c);
        let sum: f64 = row.iter().map(|&(_, x)| x).sum();
        marginals[i] = sum;
        total += sum;
        rows.push(row);
    }
    CooccurrenceCounts {
        slice_id,
        v,
        rows,
        total,
        marginals,
    }
}

/// Count co-occurrences for one slice against a fixed vocabulary.
pub fn count_cooccurrences(
    slice: &Slice,
    vocab: &Vocabulary,
    params: &CountParams,
) -> Result<CooccurrenceCounts> {
    params.validate()?;
    let v = vocab.len();
    let mut accum: Vec<HashMap<u32, f64>> = vec![HashMap::new(); v];

    for doc in &slice.documents {
        // Map once; None marks out-of-vocabulary positions.
        let ids: Vec<Option<u32>> = doc
            .iter()
            .map(|tok| vocab.index_of(tok).map(|i| i as u32))
            .collect();
        for (i, id) in ids.iter().enumerate() {
            let Some(w) = id else { continue };
            let lo = i.saturating_sub(params.window);
            let hi = (i + params.window).min(ids.len().saturating_sub(1));
            for (j, ctx) in ids.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i {
                    continue;
                }
                let Some(c) = ctx else { continue };
                let weight = if params.distance_weighting {
                    1.0 / (i.abs_diff(j) as f64)
                } else {
                    1.0
                };
                *accum[*w as usize].entry(*c).or_insert(0.0) += weight;
            }
        }
    }

    Ok(finish_counts(slice.id.clone(), v, accum))
}
