//! Hyperparameter grid search with min-max score rescaling.
//!
//! Every `(lambda, tau)` cell reports analogy accuracies at n = 1, 5, 10.
//! Per n, accuracies are rescaled across cells so the best is 1 and the
//! worst is 0, then aggregated by mean and max of the three rescaled values.
//! Selection maximizes the mean, ties broken by the max, then by the smaller
//! `(lambda, tau)`. A failed cell is recorded and excluded from rescaling.

use crate::error::{Error, Result};
use crate::eval::stats::pearson;

/// n values every cell is scored at.
pub const GRID_NS: [usize; 3] = [1, 5, 10];

/// Raw scores of one successful cell.
#[derive(Debug, Clone, Copy)]
pub struct CellScore {
    /// Analogy accuracy at n = 1, 5, 10.
    pub accuracy: [f64; 3],
    /// Structure prediction score against the reference, when available.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub lambda: f64,
    pub tau: f64,
    pub score: std::result::Result<CellScore, String>,
    /// Min-max rescaled accuracies (successful cells only).
    pub rescaled: Option<[f64; 3]>,
    pub agg_mean: Option<f64>,
    pub agg_max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub cells: Vec<GridCell>,
    /// Index into `cells` of the selected cell, if any succeeded.
    pub selected: Option<usize>,
    /// Pearson (r, p) between accuracy at n=10 and recall across cells,
    /// when at least 3 cells carry both.
    pub quality_recall_correlation: Option<(f64, f64)>,
}

impl GridOutcome {
    pub fn selected_cell(&self) -> Option<&GridCell> {
        self.selected.map(|i| &self.cells[i])
    }
}

/// Run `evaluate` over the full grid and aggregate.
pub fn grid_search(
    lambdas: &[f64],
    taus: &[f64],
    mut evaluate: impl FnMut(f64, f64) -> Result<CellScore>,
) -> Result<GridOutcome> {
    if lambdas.is_empty() || taus.is_empty() {
        return Err(Error::validation("empty grid"));
    }
    let mut cells: Vec<GridCell> = Vec::with_capacity(lambdas.len() * taus.len());
    for &lambda in lambdas {
        for &tau in taus {
            let score = evaluate(lambda, tau).map_err(|e| e.to_string());
            cells.push(GridCell {
                lambda,
                tau,
                score,
                rescaled: None,
                agg_mean: None,
                agg_max: None,
            });
        }
    }

    // min-max rescale each n across successful cells; a degenerate range
    // (single cell or all equal) rescales to 1.0
    let ok: Vec<usize> = (0..cells.len())
        .filter(|&i| cells[i].score.is_ok())
        .collect();
    if !ok.is_empty() {
        for n_idx in 0..GRID_NS.len() {
            let values: Vec<f64> = ok
                .iter()
                .map(|&i| cells[i].score.as_ref().unwrap().accuracy[n_idx])
                .collect();
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for (&i, &value) in ok.iter().zip(&values) {
                let rescaled = if max > min {
                    (value - min) / (max - min)
                } else {
                    1.0
                };
                cells[i].rescaled.get_or_insert([0.0; 3])[n_idx] = rescaled;
            }
        }
        for &i in &ok {
            let r = cells[i].rescaled.unwrap();
            cells[i].agg_mean = Some((r[0] + r[1] + r[2]) / 3.0);
            cells[i].agg_max = Some(r[0].max(r[1]).max(r[2]));
        }
    }

    let selected = ok
        .iter()
        .copied()
        .max_by(|&a, &b| {
            let (ca, cb) = (&cells[a], &cells[b]);
            ca.agg_mean
                .unwrap()
                .total_cmp(&cb.agg_mean.unwrap())
                .then(ca.agg_max.unwrap().total_cmp(&cb.agg_max.unwrap()))
                // prefer the smaller (lambda, tau) on full ties
                .then(cb.lambda.total_cmp(&ca.lambda))
                .then(cb.tau.total_cmp(&ca.tau))
        });

    let with_recall: Vec<(f64, f64)> = ok
        .iter()
        .filter_map(|&i| {
            let score = cells[i].score.as_ref().unwrap();
            score.recall.map(|r| (score.accuracy[2], r))
        })
        .collect();
    let quality_recall_correlation = if with_recall.len() >= 3 {
        let (quality, recall): (Vec<f64>, Vec<f64>) = with_recall.into_iter().unzip();
        pearson(&quality, &recall).ok()
    } else {
        None
    };

    Ok(GridOutcome {
        cells,
        selected,
        quality_recall_correlation,
    })
}

/// Log-scaled grid `2^lo ..= 2^hi`.
pub fn pow2_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| (e as f64).exp2()).collect()
}
