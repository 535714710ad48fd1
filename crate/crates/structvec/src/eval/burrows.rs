//! Burrows' Delta: a stylometric distance between slices.
//!
//! Feature words are the corpus-wide frequency ranks `[rank_lo, rank_hi)`.
//! Each feature's relative frequency is z-scored across slices (population
//! standard deviation); Delta between two slices is the mean absolute
//! difference of their z-scores. Features with zero variance carry no signal
//! and are dropped.

use std::collections::HashMap;

use ndarray::Array2;

use crate::corpus::SlicedCorpus;
use crate::error::{Error, Result};
use crate::structure::DistanceMatrix;

#[derive(Debug, Clone)]
pub struct BurrowsOutcome {
    pub delta: DistanceMatrix,
    pub features_used: Vec<String>,
    pub features_dropped: Vec<String>,
}

/// Compute the Delta matrix over all slices of the corpus.
pub fn burrows_delta(
    corpus: &SlicedCorpus,
    rank_lo: usize,
    rank_hi: usize,
) -> Result<BurrowsOutcome> {
    if rank_lo >= rank_hi {
        return Err(Error::validation(format!(
            "rank range [{rank_lo}, {rank_hi}) is empty"
        )));
    }

    let mut global: HashMap<&str, u64> = HashMap::new();
    for slice in corpus.slices() {
        for doc in &slice.documents {
            for token in doc {
                *global.entry(token.as_str()).or_insert(0) += 1;
            }
        }
    }
    if global.len() < rank_hi {
        return Err(Error::validation(format!(
            "corpus has {} distinct words; rank_hi={rank_hi} is out of reach",
            global.len()
        )));
    }
    let mut ranked: Vec<(&str, u64)> = global.iter().map(|(w, c)| (*w, *c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let features: Vec<&str> = ranked[rank_lo..rank_hi].iter().map(|(w, _)| *w).collect();

    let t_count = corpus.len();
    // relative frequency of each feature per slice
    let mut rel = Array2::zeros((t_count, features.len()));
    for (t, slice) in corpus.slices().iter().enumerate() {
        let total = slice.token_count() as f64;
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in &slice.documents {
            for token in doc {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        for (f, word) in features.iter().enumerate() {
            rel[[t, f]] = counts.get(word).copied().unwrap_or(0) as f64 / total;
        }
    }

    // z-score per feature across slices; drop zero-variance features
    let mut used = Vec::new();
    let mut dropped = Vec::new();
    let mut z_columns: Vec<Vec<f64>> = Vec::new();
    for (f, word) in features.iter().enumerate() {
        let mean = (0..t_count).map(|t| rel[[t, f]]).sum::<f64>() / t_count as f64;
        let var = (0..t_count)
            .map(|t| {
                let d = rel[[t, f]] - mean;
                d * d
            })
            .sum::<f64>()
            / t_count as f64;
        let std = var.sqrt();
        if std == 0.0 {
            dropped.push((*word).to_owned());
            continue;
        }
        used.push((*word).to_owned());
        z_columns.push((0..t_count).map(|t| (rel[[t, f]] - mean) / std).collect());
    }
    if used.len() < 2 {
        return Err(Error::validation(format!(
            "only {} features with nonzero variance; need at least 2",
            used.len()
        )));
    }

    let mut values = Array2::zeros((t_count, t_count));
    for a in 0..t_count {
        for b in a + 1..t_count {
            let delta = z_columns
                .iter()
                .map(|col| (col[a] - col[b]).abs())
                .sum::<f64>()
                / used.len() as f64;
            values[[a, b]] = delta;
            values[[b, a]] = delta;
        }
    }

    Ok(BurrowsOutcome {
        delta: DistanceMatrix::from_parts(corpus.labels(), values)?,
        features_used: used,
        features_dropped: dropped,
    })
}
