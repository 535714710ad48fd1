//! Correlation statistics.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Product-moment correlation with a two-sided p-value from the
/// t-distribution with `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::validation(format!(
            "need at least 3 points, got {}",
            x.len()
        )));
    }
    let r = pearson_r(x, y)?;

    let n = x.len() as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * ((n - 2.0) / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n - 2.0)
            .map_err(|e| Error::validation(format!("t-distribution: {e}")))?;
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    Ok((r, p))
}

/// The correlation coefficient alone; usable from n = 2 points.
pub(crate) fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::validation(
            "zero variance: correlation is undefined",
        ));
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Rank correlation: Pearson on average ranks (ties share the mean rank).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::validation(format!(
            "need at least 2 points, got {}",
            x.len()
        )));
    }
    pearson_r(&average_ranks(x), &average_ranks(y))
}

/// 1-based ranks; tied values receive the mean of their rank range.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perfect_linear_relation() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (r, p) = pearson(&x, &y).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
        assert_eq!(p, 0.0);
    }

    #[test]
    fn perfect_negative_relation() {
        let x = [1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let (r, _) = pearson(&x, &y).unwrap();
        assert_abs_diff_eq!(r, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn hand_computed_fixture() {
        // means 2.5/2.5, cov 4, variances 5 and 5 -> r = 4/5
        let (r, p) = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(r, 0.8, epsilon = 1e-12);
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn zero_variance_is_an_error() {
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err(), "too short");
    }

    #[test]
    fn spearman_is_monotone_invariant() {
        let x = [0.1, 0.7, 0.3, 0.9];
        let y = [1.0, 3.0, 2.0, 4.0];
        let base = spearman(&x, &y).unwrap();
        let transformed: Vec<f64> = y.iter().map(|v| v.exp() + 5.0).collect();
        assert_abs_diff_eq!(base, spearman(&x, &transformed).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(base, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spearman_handles_ties_with_average_ranks() {
        let r = spearman(&[1.0, 1.0, 2.0], &[3.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
    }
}
