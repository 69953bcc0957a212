//! Feature selection: one-way ANOVA F scores, ablation scores from a
//! cross-validated nearest-neighbor classifier, and the rule combining the
//! two rankings into the selected feature set.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ClifError, Result};
use crate::matrix::FeatureMatrix;
use crate::tabular::{ColumnKind, Dataset};

/// Neighbors consulted by the ablation classifier.
const KNN_NEIGHBORS: usize = 5;

// ── Rankings ────────────────────────────────────────────────────────────

/// Features ordered by score, descending; ties broken by name ascending.
/// Scores may be the `+inf` sentinel (zero within-group variance) but never
/// NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    entries: Vec<(String, f64)>,
}

impl FeatureRanking {
    /// Sorts the given scores into ranking order.
    pub fn from_scores(mut entries: Vec<(String, f64)>) -> Self {
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        FeatureRanking { entries }
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Names of the first `k` entries.
    pub fn top_k(&self, k: usize) -> Vec<&str> {
        self.entries
            .iter()
            .take(k)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn score_of(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
    }
}

/// Why a feature made it into the selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionSource {
    /// In the top-k of both rankings.
    Both,
    /// Filled from the ANOVA ranking after the intersection.
    AnovaFill,
}

impl std::fmt::Display for SelectionSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SelectionSource::Both => write!(f, "both"),
            SelectionSource::AnovaFill => write!(f, "anova_fill"),
        }
    }
}

/// The selected feature set, ordered by ANOVA rank.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: Vec<(String, SelectionSource)>,
}

impl SelectionResult {
    pub fn names(&self) -> Vec<String> {
        self.selected.iter().map(|(n, _)| n.clone()).collect()
    }
}

// ── ANOVA ───────────────────────────────────────────────────────────────

/// One-way ANOVA F statistic over the given groups.
///
/// F = MSB / MSW with MSB = sum n_i (mean_i - grand)^2 / (g - 1) and
/// MSW = sum of within-group squared deviations / (N - g). Returns 0 when
/// all group means are equal, and the `+inf` sentinel when the groups have
/// zero within-group variance but distinct means.
pub fn anova_f(groups: &[Vec<f64>]) -> Result<f64> {
    if groups.len() < 2 {
        return Err(ClifError::Data(format!(
            "anova needs at least 2 groups, got {}",
            groups.len()
        )));
    }
    if let Some(i) = groups.iter().position(|g| g.is_empty()) {
        return Err(ClifError::Data(format!("anova group {i} is empty")));
    }
    let g = groups.len();
    let n_total: usize = groups.iter().map(Vec::len).sum();
    if n_total < g + 1 {
        return Err(ClifError::Data(
            "anova needs at least one within-group degree of freedom".into(),
        ));
    }

    let group_means: Vec<f64> = groups
        .iter()
        .map(|grp| grp.iter().sum::<f64>() / grp.len() as f64)
        .collect();
    let grand_mean = groups.iter().flat_map(|grp| grp.iter()).sum::<f64>() / n_total as f64;

    let ssb: f64 = groups
        .iter()
        .zip(&group_means)
        .map(|(grp, m)| grp.len() as f64 * (m - grand_mean).powi(2))
        .sum();
    let ssw: f64 = groups
        .iter()
        .zip(&group_means)
        .map(|(grp, m)| grp.iter().map(|x| (x - m).powi(2)).sum::<f64>())
        .sum();

    if ssb == 0.0 {
        return Ok(0.0);
    }
    let msb = ssb / (g - 1) as f64;
    let msw = ssw / (n_total - g) as f64;
    if msw == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(msb / msw)
}

/// Partitions rows of an encoded dataset by the target column's value,
/// returning group keys sorted ascending plus per-group row indices.
fn group_rows_by_target(ds: &Dataset, target: &str) -> Result<(usize, Vec<Vec<usize>>)> {
    let target_idx = ds
        .column_index(target)
        .ok_or_else(|| ClifError::Schema(format!("unknown target column `{target}`")))?;
    if ds.columns()[target_idx].kind != ColumnKind::Categorical {
        return Err(ClifError::Config(format!(
            "target column `{target}` must be a categorical (indicator) column"
        )));
    }
    let mut keys: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, v) in ds.column_values(target_idx).enumerate() {
        let x = v.as_number().ok_or_else(|| {
            ClifError::Data(format!(
                "target column `{target}` is not numeric at row {i}"
            ))
        })?;
        match keys.iter().position(|k| k.total_cmp(&x).is_eq()) {
            Some(g) => groups[g].push(i),
            None => {
                keys.push(x);
                groups.push(vec![i]);
            }
        }
    }
    if keys.len() < 2 {
        return Err(ClifError::Data(format!(
            "target column `{target}` has fewer than 2 distinct values"
        )));
    }
    // Sort groups by key so group order never depends on row order.
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    let groups = order
        .into_iter()
        .map(|g| std::mem::take(&mut groups[g]))
        .collect();
    Ok((target_idx, groups))
}

/// Scores every non-target feature with [`anova_f`], grouping rows by the
/// target column's value.
pub fn rank_anova(ds: &Dataset, target: &str) -> Result<FeatureRanking> {
    let (target_idx, groups) = group_rows_by_target(ds, target)?;
    let matrix = ds.to_matrix()?;
    let mut entries = Vec::with_capacity(ds.n_cols().saturating_sub(1));
    for (j, col) in ds.columns().iter().enumerate() {
        if j == target_idx {
            continue;
        }
        let feature_groups: Vec<Vec<f64>> = groups
            .iter()
            .map(|rows| rows.iter().map(|&i| matrix.row(i)[j]).collect())
            .collect();
        entries.push((col.name.clone(), anova_f(&feature_groups)?));
    }
    Ok(FeatureRanking::from_scores(entries))
}

// ── Ablation ────────────────────────────────────────────────────────────

/// Deterministic stratified fold assignment: per class, indices are
/// shuffled with the seeded generator and dealt round-robin, so every fold
/// holds at least one member of every class.
fn stratified_folds(
    groups: &[Vec<usize>],
    folds: usize,
    seed: u64,
    n: usize,
) -> Result<Vec<usize>> {
    for (g, rows) in groups.iter().enumerate() {
        if rows.len() < folds {
            return Err(ClifError::Data(format!(
                "class {g} has {} rows, too few for {folds}-fold stratification",
                rows.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    for rows in groups {
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut rng);
        for (pos, &row) in shuffled.iter().enumerate() {
            assignment[row] = pos % folds;
        }
    }
    Ok(assignment)
}

/// Keeps the `k` nearest (distance, index) pairs seen so far, smallest
/// first; ties prefer the lower index.
struct TopK {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn push(&mut self, dist: f64, idx: usize) {
        if self.items.len() == self.k {
            let worst = self.items[self.k - 1];
            if (dist, idx) >= worst {
                return;
            }
        }
        let pos = self.items.partition_point(|&(d, i)| (d, i) < (dist, idx));
        self.items.insert(pos, (dist, idx));
        if self.items.len() > self.k {
            self.items.pop();
        }
    }
}

/// Majority vote over neighbor classes; ties go to the lower class index.
fn vote(neighbors: &[(f64, usize)], train_classes: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &(_, idx) in neighbors {
        counts[train_classes[idx]] += 1;
    }
    let mut best = 0;
    for c in 1..n_classes {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

/// Ranks features by the drop in cross-validated balanced accuracy when the
/// feature is removed from a 5-nearest-neighbor classifier predicting the
/// target column.
///
/// Variant predictions reuse the full-feature distances: removing feature j
/// turns d^2 into d^2 - (x_j - y_j)^2, so each test point costs one pass
/// over the training rows per variant instead of a full re-computation.
/// Fold splits derive from `seed` alone, so the ranking is reproducible.
pub fn ablation_rank(
    ds: &Dataset,
    target: &str,
    folds: usize,
    seed: u64,
) -> Result<FeatureRanking> {
    if folds < 2 {
        return Err(ClifError::Config(format!(
            "folds must be >= 2, got {folds}"
        )));
    }
    let (target_idx, groups) = group_rows_by_target(ds, target)?;
    let n = ds.n_rows();
    let n_classes = groups.len();
    let fold_of = stratified_folds(&groups, folds, seed, n)?;

    let mut row_class = vec![0usize; n];
    for (c, rows) in groups.iter().enumerate() {
        for &i in rows {
            row_class[i] = c;
        }
    }

    let feature_cols: Vec<usize> = (0..ds.n_cols()).filter(|&j| j != target_idx).collect();
    let full = ds.to_matrix()?;
    let points = full_without_column(&full, target_idx);
    // Positions into `points` columns for each ablation variant.
    let n_features = feature_cols.len();
    let n_variants = n_features + 1; // baseline first

    // balanced accuracy accumulators: per variant, per fold, per class.
    let mut correct = vec![vec![vec![0usize; n_classes]; folds]; n_variants];
    let mut totals = vec![vec![0usize; n_classes]; folds];

    for fold in 0..folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        let train_classes: Vec<usize> = train.iter().map(|&i| row_class[i]).collect();
        let k_nn = KNN_NEIGHBORS.min(train.len());

        let predictions: Vec<Vec<usize>> = test
            .par_iter()
            .map(|&ti| {
                let trow = points.row(ti);
                let mut base = Vec::with_capacity(train.len());
                for &si in &train {
                    base.push(crate::matrix::sq_euclidean(trow, points.row(si)));
                }
                let mut preds = Vec::with_capacity(n_variants);
                let mut top = TopK::new(k_nn);
                for (pos, &d) in base.iter().enumerate() {
                    top.push(d, pos);
                }
                preds.push(vote(&top.items, &train_classes, n_classes));
                for (feat, &x) in trow.iter().enumerate().take(n_features) {
                    let mut top = TopK::new(k_nn);
                    for (pos, &si) in train.iter().enumerate() {
                        let diff = x - points.row(si)[feat];
                        let d = (base[pos] - diff * diff).max(0.0);
                        top.push(d, pos);
                    }
                    preds.push(vote(&top.items, &train_classes, n_classes));
                }
                preds
            })
            .collect();

        for (t, preds) in test.iter().zip(&predictions) {
            let class = row_class[*t];
            totals[fold][class] += 1;
            for (v, &pred) in preds.iter().enumerate() {
                if pred == class {
                    correct[v][fold][class] += 1;
                }
            }
        }
    }

    let score_of = |variant: usize| -> f64 {
        let mut acc = 0.0;
        for fold in 0..folds {
            let mut recall_sum = 0.0;
            for c in 0..n_classes {
                recall_sum += correct[variant][fold][c] as f64 / totals[fold][c] as f64;
            }
            acc += recall_sum / n_classes as f64;
        }
        acc / folds as f64
    };

    let baseline = score_of(0);
    let entries: Vec<(String, f64)> = feature_cols
        .iter()
        .enumerate()
        .map(|(pos, &j)| (ds.columns()[j].name.clone(), baseline - score_of(pos + 1)))
        .collect();
    Ok(FeatureRanking::from_scores(entries))
}

/// Copies the matrix dropping one column.
fn full_without_column(m: &FeatureMatrix, drop: usize) -> FeatureMatrix {
    let cols = m.n_cols() - 1;
    let mut data = Vec::with_capacity(m.n_rows() * cols);
    for i in 0..m.n_rows() {
        let row = m.row(i);
        data.extend_from_slice(&row[..drop]);
        data.extend_from_slice(&row[drop + 1..]);
    }
    FeatureMatrix::from_flat(data, m.n_rows(), cols)
}

// ── Combination ─────────────────────────────────────────────────────────

/// Combines the two rankings: features in both top-k sets are selected as
/// corroborated, and the remaining slots are filled by ANOVA order. The
/// output is ordered by ANOVA rank and always has exactly `k` entries.
pub fn combine_select(
    anova: &FeatureRanking,
    ablation: &FeatureRanking,
    k: usize,
) -> Result<SelectionResult> {
    let universe_a: BTreeSet<&str> = anova.entries().iter().map(|(n, _)| n.as_str()).collect();
    let universe_b: BTreeSet<&str> = ablation.entries().iter().map(|(n, _)| n.as_str()).collect();
    if universe_a != universe_b {
        return Err(ClifError::Config(
            "rankings cover different feature universes".into(),
        ));
    }
    if k > universe_a.len() {
        return Err(ClifError::Config(format!(
            "k = {k} exceeds the {} available features",
            universe_a.len()
        )));
    }
    let top_ablation: BTreeSet<&str> = ablation.top_k(k).into_iter().collect();
    let selected = anova
        .top_k(k)
        .into_iter()
        .map(|name| {
            let source = if top_ablation.contains(name) {
                SelectionSource::Both
            } else {
                SelectionSource::AnovaFill
            };
            (name.to_string(), source)
        })
        .collect();
    Ok(SelectionResult { selected })
}
