//! Clustering agreement metrics.

use std::collections::BTreeMap;

/// Adjusted Rand index between two labelings of the same rows: 1 means
/// identical partitions (up to label permutation), 0 is chance-level
/// agreement. Noise labels (-1) are treated as one ordinary group.
///
/// Panics if the labelings differ in length.
pub fn adjusted_rand_index(a: &[i64], b: &[i64]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same rows");
    let n = a.len() as f64;
    if a.is_empty() {
        return 1.0;
    }

    let mut contingency: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    let mut rows: BTreeMap<i64, f64> = BTreeMap::new();
    let mut cols: BTreeMap<i64, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *contingency.entry((x, y)).or_insert(0.0) += 1.0;
        *rows.entry(x).or_insert(0.0) += 1.0;
        *cols.entry(y).or_insert(0.0) += 1.0;
    }

    let comb2 = |x: f64| x * (x - 1.0) / 2.0;
    let sum_cells: f64 = contingency.values().map(|&c| comb2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| comb2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| comb2(c)).sum();

    let expected = sum_rows * sum_cols / comb2(n);
    let max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (sum_cells - expected) / (max_index - expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_partitions_score_one() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 1]), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert_eq!(adjusted_rand_index(&[-1, 0, 0], &[5, 2, 2]), 1.0);
    }

    #[test]
    fn trivial_vs_split_scores_zero() {
        let ari = adjusted_rand_index(&[0, 0, 0, 0], &[0, 0, 1, 1]);
        assert!(ari.abs() < 1e-12, "{ari}");
    }

    #[test]
    fn partial_agreement_fixture() {
        // hand-computed: index 1, expected 1, max 2.5
        let ari = adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 1, 1]);
        assert!(ari.abs() < 1e-12, "{ari}");
    }

    #[test]
    fn disagreement_scores_below_agreement() {
        let truth = [0, 0, 0, 1, 1, 1, 2, 2, 2];
        let good = [0, 0, 0, 1, 1, 1, 2, 2, 2];
        let bad = [0, 1, 2, 0, 1, 2, 0, 1, 2];
        assert!(adjusted_rand_index(&truth, &good) > adjusted_rand_index(&truth, &bad));
        assert!(adjusted_rand_index(&truth, &bad) < 0.1);
    }
}
