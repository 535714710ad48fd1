//! Agglomerative clustering of slices with average linkage.
//!
//! Cluster ids follow the usual stepwise convention: leaves are `0..T`, the
//! cluster created by merge `s` gets id `T + s`. Ties are broken by the
//! smallest pair of cluster ids so the output is deterministic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::DistanceMatrix;

/// One merge step: the two cluster ids joined and the linkage height.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// Stepwise dendrogram over the slice labels.
#[derive(Debug, Clone, Serialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

/// Average-linkage clustering of the T slices.
pub fn dendrogram(distances: &DistanceMatrix) -> Result<Dendrogram> {
    let t = distances.len();
    if t < 2 {
        return Err(Error::validation(format!(
            "dendrogram needs at least 2 slices, got {t}"
        )));
    }

    struct Cluster {
        id: usize,
        size: usize,
    }

    let mut clusters: Vec<Cluster> = (0..t).map(|id| Cluster { id, size: 1 }).collect();
    // dist[a][b] holds the linkage distance between active clusters at
    // positions a and b of `clusters`.
    let mut dist: Vec<Vec<f64>> = (0..t)
        .map(|i| (0..t).map(|j| distances.get(i, j)).collect())
        .collect();

    let mut merges = Vec::with_capacity(t - 1);
    for step in 0..t - 1 {
        // smallest distance; ties by the smaller (id, id) pair
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let d = dist[a][b];
                let (lo, hi) = ordered_ids(clusters[a].id, clusters[b].id);
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi)) => {
                        d < bd || (d == bd && (lo, hi) < (blo, bhi))
                    }
                };
                if better {
                    best = Some((d, lo, hi));
                }
            }
        }
        let (height, lo_id, hi_id) = best.expect("at least two active clusters");
        let a = clusters.iter().position(|c| c.id == lo_id).unwrap();
        let b = clusters.iter().position(|c| c.id == hi_id).unwrap();
        let (a, b) = (a.min(b), a.max(b));

        merges.push(Merge {
            left: lo_id,
            right: hi_id,
            height,
        });

        // Lance-Williams update for average linkage:
        // d(a∪b, k) = (|a| d(a,k) + |b| d(b,k)) / (|a| + |b|)
        let (sa, sb) = (clusters[a].size as f64, clusters[b].size as f64);
        for k in 0..clusters.len() {
            if k == a || k == b {
                continue;
            }
            let merged = (sa * dist[a][k] + sb * dist[b][k]) / (sa + sb);
            dist[a][k] = merged;
            dist[k][a] = merged;
        }
        clusters[a] = Cluster {
            id: t + step,
            size: (sa + sb) as usize,
        };
        clusters.remove(b);
        for row in dist.iter_mut() {
            row.remove(b);
        }
        dist.remove(b);
    }

    Ok(Dendrogram {
        labels: distances.labels().to_vec(),
        merges,
    })
}

fn ordered_ids(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Dendrogram {
    fn node_height(&self, id: usize) -> f64 {
        if id < self.labels.len() {
            0.0
        } else {
            self.merges[id - self.labels.len()].height
        }
    }

    fn newick_node(&self, id: usize, out: &mut String) {
        if id < self.labels.len() {
            out.push_str(&quote_newick(&self.labels[id]));
        } else {
            let merge = &self.merges[id - self.labels.len()];
            out.push('(');
            self.newick_node(merge.left, out);
            out.push_str(&format!(":{}", merge.height - self.node_height(merge.left)));
            out.push(',');
            self.newick_node(merge.right, out);
            out.push_str(&format!(
                ":{}",
                merge.height - self.node_height(merge.right)
            ));
            out.push(')');
        }
    }

    /// Newick text with ultrametric branch lengths.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        let root = self.labels.len() + self.merges.len() - 1;
        self.newick_node(root, &mut out);
        out.push(';');
        out
    }

    /// JSON object with the label list and the merge list.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dendrogram serializes")
    }
}

fn quote_newick(label: &str) -> String {
    if label
        .chars()
        .any(|c| matches!(c, '(' | ')' | ',' | ':' | ';' | '\'' | '[' | ']') || c.is_whitespace())
    {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::DistanceMatrix;
    use ndarray::array;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn two_slices_merge_at_their_distance() {
        let d = DistanceMatrix::from_parts(labels(2), array![[0.0, 3.5], [3.5, 0.0]]).unwrap();
        let tree = dendrogram(&d).unwrap();
        assert_eq!(tree.merges, vec![Merge { left: 0, right: 1, height: 3.5 }]);
        assert_eq!(tree.to_newick(), "(0:3.5,1:3.5);");
    }

    #[test]
    fn two_well_separated_pairs_merge_within_pairs_first() {
        // hand-traced average linkage: pairs (0,1) and (2,3) at distance 1,
        // everything across at 10; first two merges at height 1, final merge
        // at the average cross distance 10.
        let mut values = ndarray::Array2::from_elem((4, 4), 10.0);
        for i in 0..4 {
            values[[i, i]] = 0.0;
        }
        values[[0, 1]] = 1.0;
        values[[1, 0]] = 1.0;
        values[[2, 3]] = 1.0;
        values[[3, 2]] = 1.0;
        let d = DistanceMatrix::from_parts(labels(4), values).unwrap();
        let tree = dendrogram(&d).unwrap();
        assert_eq!(tree.merges[0], Merge { left: 0, right: 1, height: 1.0 });
        assert_eq!(tree.merges[1], Merge { left: 2, right: 3, height: 1.0 });
        assert_eq!(tree.merges[2], Merge { left: 4, right: 5, height: 10.0 });
    }

    #[test]
    fn equal_distances_break_ties_by_cluster_index() {
        let mut values = ndarray::Array2::from_elem((3, 3), 2.0);
        for i in 0..3 {
            values[[i, i]] = 0.0;
        }
        let d = DistanceMatrix::from_parts(labels(3), values).unwrap();
        let tree = dendrogram(&d).unwrap();
        assert_eq!(tree.merges[0], Merge { left: 0, right: 1, height: 2.0 });
        assert_eq!(tree.merges[1], Merge { left: 2, right: 3, height: 2.0 });
        // deterministic: run again
        assert_eq!(dendrogram(&d).unwrap().merges, tree.merges);
    }

    #[test]
    fn merge_heights_are_non_decreasing() {
        let values = array![
            [0.0, 2.0, 6.0, 9.0],
            [2.0, 0.0, 5.0, 8.0],
            [6.0, 5.0, 0.0, 3.0],
            [9.0, 8.0, 3.0, 0.0]
        ];
        let d = DistanceMatrix::from_parts(labels(4), values).unwrap();
        let tree = dendrogram(&d).unwrap();
        for pair in tree.merges.windows(2) {
            assert!(pair[0].height <= pair[1].height);
        }
    }

    #[test]
    fn newick_quotes_awkward_labels() {
        let d = DistanceMatrix::from_parts(
            vec!["with space".into(), "plain".into()],
            array![[0.0, 1.0], [1.0, 0.0]],
        )
        .unwrap();
        let tree = dendrogram(&d).unwrap();
        assert_eq!(tree.to_newick(), "('with space':1,plain:1);");
    }
}
