//! Affinity and distance structures over slices.
//!
//! Affinities are T×T nonnegative symmetric weights with zero diagonal,
//! either given a priori (chain and tree priors) or estimated from the
//! pairwise squared-Frobenius distances between slice embeddings. Both kinds
//! share one TSV format tagged `kind=affinity` or `kind=distance`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::validate_label;
use crate::embedding::{sq_frobenius_diff, EmbeddingSet};
use crate::error::{Error, Result};

pub const MATRIX_HEADER_PREFIX: &str = "#structvec-matrix v1";

/// Labeled square matrix shared by both structure kinds: symmetric,
/// nonnegative, finite, zero diagonal.
#[derive(Debug, Clone, PartialEq)]
struct LabeledMatrix {
    labels: Vec<String>,
    values: Array2<f64>,
}

impl LabeledMatrix {
    fn validate(labels: &[String], values: &Array2<f64>) -> Result<()> {
        let t = labels.len();
        if values.nrows() != values.ncols() {
            return Err(Error::validation(format!(
                "matrix is {}x{}, expected square",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.nrows() != t {
            return Err(Error::validation(format!(
                "{} labels for a {}x{} matrix",
                t,
                values.nrows(),
                values.ncols()
            )));
        }
        let mut seen = HashSet::new();
        for label in labels {
            validate_label(label)?;
            if !seen.insert(label) {
                return Err(Error::validation(format!("duplicate label {label:?}")));
            }
        }
        for i in 0..t {
            if values[[i, i]] != 0.0 {
                return Err(Error::validation(format!(
                    "diagonal entry ({i}, {i}) is {}, expected 0",
                    values[[i, i]]
                )));
            }
            for j in 0..t {
                let x = values[[i, j]];
                if !x.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "entry ({i}, {j}) is not finite"
                    )));
                }
                if x < 0.0 {
                    return Err(Error::validation(format!(
                        "entry ({i}, {j}) is negative: {x}"
                    )));
                }
                if values[[j, i]] != x {
                    return Err(Error::validation(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn save(&self, path: &Path, kind: &str) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{MATRIX_HEADER_PREFIX} kind={kind}")?;
        for label in &self.labels {
            write!(out, "\t{label}")?;
        }
        writeln!(out)?;
        for (i, label) in self.labels.iter().enumerate() {
            write!(out, "{label}")?;
            for j in 0..self.labels.len() {
                write!(out, "\t{:.16e}", self.values[[i, j]])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    fn load(path: &Path, expected_kind: &str) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };

        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty matrix file".into()))??;
        let kind = header
            .strip_prefix(MATRIX_HEADER_PREFIX)
            .and_then(|rest| rest.strip_prefix(" kind="))
            .ok_or_else(|| parse_err(1, format!("unexpected header {header:?}")))?;
        if kind != expected_kind {
            return Err(Error::validation(format!(
                "{} holds kind={kind}, expected kind={expected_kind}",
                path.display()
            )));
        }

        let label_row = lines
            .next()
            .ok_or_else(|| parse_err(2, "missing label row".into()))??;
        let labels: Vec<String> = label_row
            .split('\t')
            .skip(1) // corner cell
            .map(str::to_owned)
            .collect();
        if labels.is_empty() {
            return Err(parse_err(2, "no labels".into()));
        }

        let t = labels.len();
        let mut values = Array2::zeros((t, t));
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            if i >= t {
                return Err(parse_err(i + 3, "more rows than labels".into()));
            }
            let mut parts = line.split('\t');
            let row_label = parts
                .next()
                .ok_or_else(|| parse_err(i + 3, "missing row label".into()))?;
            if row_label != labels[i] {
                return Err(Error::validation(format!(
                    "row {} is labeled {:?} but the header column {} is {:?}",
                    i, row_label, i, labels[i]
                )));
            }
            let mut count = 0;
            for (j, cell) in parts.enumerate() {
                if j >= t {
                    return Err(parse_err(i + 3, "more cells than labels".into()));
                }
                values[[i, j]] = cell
                    .parse()
                    .map_err(|e| parse_err(i + 3, format!("bad value in column {j}: {e}")))?;
                count += 1;
            }
            if count != t {
                return Err(parse_err(i + 3, format!("expected {t} cells, found {count}")));
            }
        }

        // Asymmetric inputs are averaged; exact for already-symmetric data.
        let symmetrized = (&values + &values.t()) / 2.0;
        LabeledMatrix::validate(&labels, &symmetrized)?;
        Ok(LabeledMatrix {
            labels,
            values: symmetrized,
        })
    }
}

macro_rules! labeled_matrix_kind {
    ($name:ident, $kind:expr) => {
        impl $name {
            pub fn from_parts(labels: Vec<String>, values: Array2<f64>) -> Result<Self> {
                LabeledMatrix::validate(&labels, &values)?;
                Ok($name(LabeledMatrix { labels, values }))
            }

            /// Number of slices T.
            pub fn len(&self) -> usize {
                self.0.labels.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.labels.is_empty()
            }

            pub fn labels(&self) -> &[String] {
                &self.0.labels
            }

            pub fn values(&self) -> &Array2<f64> {
                &self.0.values
            }

            pub fn get(&self, i: usize, j: usize) -> f64 {
                self.0.values[[i, j]]
            }

            pub fn relabel(mut self, labels: Vec<String>) -> Result<Self> {
                if labels.len() != self.0.labels.len() {
                    return Err(Error::validation(format!(
                        "{} labels for T={}",
                        labels.len(),
                        self.0.labels.len()
                    )));
                }
                for label in &labels {
                    validate_label(label)?;
                }
                self.0.labels = labels;
                Ok(self)
            }

            pub fn save(&self, path: &Path) -> Result<()> {
                self.0.save(path, $kind)
            }

            pub fn load(path: &Path) -> Result<Self> {
                Ok($name(LabeledMatrix::load(path, $kind)?))
            }
        }
    };
}

/// T×T nonnegative symmetric affinity weights W with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(LabeledMatrix);

/// T×T pairwise squared-Frobenius distances D with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(LabeledMatrix);

labeled_matrix_kind!(AffinityMatrix, "affinity");
labeled_matrix_kind!(DistanceMatrix, "distance");

/// Chain prior over `t` consecutive slices: `W[i,j] = 1` iff `|i-j| = 1`.
pub fn chain_prior(t: usize) -> Result<AffinityMatrix> {
    if t < 2 {
        return Err(Error::validation(format!(
            "chain prior needs at least 2 slices, got {t}"
        )));
    }
    let mut values = Array2::zeros((t, t));
    for i in 0..t - 1 {
        values[[i, i + 1]] = 1.0;
        values[[i + 1, i]] = 1.0;
    }
    AffinityMatrix::from_parts((0..t).map(|i| i.to_string()).collect(), values)
}

/// Parent/child edges describing clusters of one main category and its
/// subcategories. Every slice appears at most once as a child.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Hierarchy {
    pub edges: Vec<(String, String)>,
}

impl Hierarchy {
    pub fn new(edges: Vec<(String, String)>) -> Self {
        Hierarchy { edges }
    }
}

/// Tree prior: 1.0 between parent and child, 0.5 between siblings sharing a
/// parent, 0 otherwise.
pub fn tree_prior(hierarchy: &Hierarchy, labels: &[String]) -> Result<AffinityMatrix> {
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let resolve = |label: &str| -> Result<usize> {
        index.get(label).copied().ok_or_else(|| {
            Error::validation(format!("hierarchy names unknown slice {label:?}"))
        })
    };

    let t = labels.len();
    let mut parent_of: HashMap<usize, usize> = HashMap::new();
    let mut values = Array2::zeros((t, t));
    for (parent, child) in &hierarchy.edges {
        let p = resolve(parent)?;
        let c = resolve(child)?;
        if p == c {
            return Err(Error::validation(format!(
                "slice {parent:?} cannot be its own parent"
            )));
        }
        if parent_of.insert(c, p).is_some() {
            return Err(Error::validation(format!(
                "slice {child:?} appears more than once as a child"
            )));
        }
        values[[p, c]] = 1.0;
        values[[c, p]] = 1.0;
    }

    // Forest check: following parents must terminate.
    for &start in parent_of.keys() {
        let mut node = start;
        let mut steps = 0;
        while let Some(&p) = parent_of.get(&node) {
            node = p;
            steps += 1;
            if steps > t {
                return Err(Error::validation("hierarchy contains a cycle"));
            }
        }
    }

    let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
    for (&c, &p) in &parent_of {
        children.entry(p).or_default().push(c);
    }
    for siblings in children.values() {
        for (a_pos, &a) in siblings.iter().enumerate() {
            for &b in &siblings[a_pos + 1..] {
                values[[a, b]] = 0.5;
                values[[b, a]] = 0.5;
            }
        }
    }

    AffinityMatrix::from_parts(labels.to_vec(), values)
}

/// Pairwise squared-Frobenius distances between slice embeddings; each
/// unordered pair is computed once so symmetry is exact.
pub fn distance_matrix(embeddings: &EmbeddingSet) -> DistanceMatrix {
    let t = embeddings.len();
    let mut values = Array2::zeros((t, t));
    for i in 0..t {
        for j in i + 1..t {
            let d = sq_frobenius_diff(embeddings.matrix(i), embeddings.matrix(j));
            values[[i, j]] = d;
            values[[j, i]] = d;
        }
    }
    DistanceMatrix::from_parts(embeddings.labels().to_vec(), values)
        .expect("distances are symmetric, nonnegative and finite by construction")
}

/// Entry-wise inverse of D (clamped below by `eps`), then normalized by the
/// corresponding row and column sums.
pub fn update_affinity(distances: &DistanceMatrix, eps: f64) -> Result<AffinityMatrix> {
    let t = distances.len();
    if t < 2 {
        return Err(Error::validation(format!(
            "affinity update needs at least 2 slices, got {t}"
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::validation(format!("eps must be positive, got {eps}")));
    }

    let mut inverse = Array2::zeros((t, t));
    for i in 0..t {
        for j in 0..t {
            if i != j {
                inverse[[i, j]] = 1.0 / distances.get(i, j).max(eps);
            }
        }
    }
    let row_sums: Vec<f64> = (0..t).map(|i| (0..t).map(|j| inverse[[i, j]]).sum()).collect();
    let col_sums: Vec<f64> = (0..t).map(|j| (0..t).map(|i| inverse[[i, j]]).sum()).collect();

    let mut values = Array2::zeros((t, t));
    for i in 0..t {
        for j in 0..t {
            if i != j {
                values[[i, j]] = inverse[[i, j]] / (row_sums[i] + col_sums[j]);
            }
        }
    }
    AffinityMatrix::from_parts(distances.labels().to_vec(), values)
}

/// Indices of the `k` smallest off-diagonal entries in row `t`, ties broken
/// by smaller index.
fn k_smallest_in_row(values: &Array2<f64>, t: usize, k: usize) -> HashSet<usize> {
    let mut order: Vec<usize> = (0..values.nrows()).filter(|&j| j != t).collect();
    order.sort_by(|&a, &b| {
        values[[t, a]]
            .partial_cmp(&values[[t, b]])
            .expect("distances are finite")
            .then(a.cmp(&b))
    });
    order.into_iter().take(k).collect()
}

/// Mean over slices of the overlap between the k nearest slices under the
/// true and the predicted distances.
pub fn recall_at_k(d_true: &DistanceMatrix, d_pred: &DistanceMatrix, k: usize) -> Result<f64> {
    if d_true.labels() != d_pred.labels() {
        return Err(Error::validation(format!(
            "label mismatch between structures: {:?} vs {:?}",
            d_true.labels(),
            d_pred.labels()
        )));
    }
    let t = d_true.len();
    if k == 0 || k >= t {
        return Err(Error::validation(format!(
            "k must satisfy 1 <= k < T, got k={k}, T={t}"
        )));
    }

    let mut total = 0.0;
    for row in 0..t {
        let truth = k_smallest_in_row(d_true.values(), row, k);
        let pred = k_smallest_in_row(d_pred.values(), row, k);
        let tp = truth.intersection(&pred).count();
        // FN = k - TP, so recall_t = TP / k
        total += tp as f64 / k as f64;
    }
    Ok(total / t as f64)
}

/// Turn an affinity into a distance by `max(W) - W` off-diagonal; the rank
/// order of every row is exactly reversed.
pub fn affinity_to_distance(affinity: &AffinityMatrix) -> Result<DistanceMatrix> {
    let max = affinity.values().iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::validation(
            "structure carries no ranking: all affinities are zero",
        ));
    }
    let t = affinity.len();
    let mut values = Array2::zeros((t, t));
    for i in 0..t {
        for j in 0..t {
            if i != j {
                values[[i, j]] = max - affinity.get(i, j);
            }
        }
    }
    DistanceMatrix::from_parts(affinity.labels().to_vec(), values)
}
