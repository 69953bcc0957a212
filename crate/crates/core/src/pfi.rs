//! Principal feature identification: for every pair of clusters, compare
//! each feature's empirical distribution across the two clusters with the
//! exact 1-D Wasserstein distance, and flag features whose distance clears
//! a per-kind significance threshold.
//!
//! Comparisons run on raw (unscaled) feature values so thresholds keep
//! their physical units: indicator features use an absolute cut, numerical
//! features use a fraction of the feature's full-dataset range.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::ClusterInfo;
use crate::error::{ClifError, Result};
use crate::tabular::{ColumnKind, Dataset};

/// Significance cuts for the principal flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfiThresholds {
    /// Absolute Wasserstein cut for 0/1 indicator features. The default of
    /// 1.0 flags only pure opposition (all-ones versus all-zeros).
    pub categorical_cut: f64,
    /// Fraction of a numerical feature's full-dataset range that the
    /// distance must reach.
    pub numerical_fraction: f64,
}

impl Default for PfiThresholds {
    fn default() -> Self {
        PfiThresholds {
            categorical_cut: 1.0,
            numerical_fraction: 0.10,
        }
    }
}

impl PfiThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.categorical_cut > 0.0 && self.categorical_cut <= 1.0) {
            return Err(ClifError::Config(format!(
                "categorical_cut must be in (0, 1], got {}",
                self.categorical_cut
            )));
        }
        if !(self.numerical_fraction > 0.0 && self.numerical_fraction <= 1.0) {
            return Err(ClifError::Config(format!(
                "numerical_fraction must be in (0, 1], got {}",
                self.numerical_fraction
            )));
        }
        Ok(())
    }
}

/// One feature compared across one cluster pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureComparison {
    pub feature: String,
    pub distance: f64,
    pub threshold_used: f64,
    pub principal: bool,
}

/// A [`FeatureComparison`] in the context of an iteration and cluster pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalFeatureFinding {
    pub iteration: usize,
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub feature: String,
    pub distance: f64,
    pub threshold_used: f64,
    pub principal: bool,
}

/// Exact first Wasserstein distance between two empirical distributions,
/// each sample point carrying mass 1/n.
///
/// Merges the sorted samples and accumulates |F_a - F_b| times the segment
/// width between consecutive breakpoints, which integrates the absolute
/// CDF difference exactly and handles unequal sample sizes.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(ClifError::Data(
            "wasserstein distance needs nonempty samples".into(),
        ));
    }
    for &x in a.iter().chain(b) {
        if !x.is_finite() {
            return Err(ClifError::Data("wasserstein samples must be finite".into()));
        }
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let na = sa.len() as f64;
    let nb = sb.len() as f64;

    let mut total = 0.0;
    let mut prev = f64::NAN;
    let (mut i, mut j) = (0usize, 0usize);
    while i < sa.len() || j < sb.len() {
        let v = match (sa.get(i), sb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        if !prev.is_nan() {
            total += (v - prev) * (i as f64 / na - j as f64 / nb).abs();
        }
        while i < sa.len() && sa[i] == v {
            i += 1;
        }
        while j < sb.len() && sb[j] == v {
            j += 1;
        }
        prev = v;
    }
    Ok(total)
}

/// Significance threshold for one column: the absolute cut for indicator
/// columns, or the range fraction for numerical columns (range taken over
/// the full dataset, not the clusters).
fn feature_threshold(ds: &Dataset, col: usize, thresholds: &PfiThresholds) -> Result<f64> {
    match ds.columns()[col].kind {
        ColumnKind::Categorical => Ok(thresholds.categorical_cut),
        ColumnKind::Numerical => {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for v in ds.column_values(col) {
                let x = v.as_number().ok_or_else(|| {
                    ClifError::Data(format!(
                        "column `{}` is not numeric",
                        ds.columns()[col].name
                    ))
                })?;
                min = min.min(x);
                max = max.max(x);
            }
            Ok(thresholds.numerical_fraction * (max - min))
        }
    }
}

fn column_values_for(ds: &Dataset, col: usize, rows: &[usize]) -> Result<Vec<f64>> {
    rows.iter()
        .map(|&i| {
            ds.cell(i, col).as_number().ok_or_else(|| {
                ClifError::Data(format!(
                    "column `{}` is not numeric at row {i}",
                    ds.columns()[col].name
                ))
            })
        })
        .collect()
}

/// Compares every listed feature between two disjoint row sets of the raw
/// dataset. Features are evaluated in dataset column order.
pub fn principal_features(
    ds_raw: &Dataset,
    members_a: &[usize],
    members_b: &[usize],
    features: &[String],
    thresholds: &PfiThresholds,
) -> Result<Vec<FeatureComparison>> {
    thresholds.validate()?;
    if members_a.is_empty() || members_b.is_empty() {
        return Err(ClifError::Data("cluster member set is empty".into()));
    }
    if members_a.iter().any(|i| members_b.contains(i)) {
        return Err(ClifError::Data("cluster member sets overlap".into()));
    }
    let cols = feature_columns(ds_raw, features)?;
    cols.iter()
        .map(|&col| {
            let va = column_values_for(ds_raw, col, members_a)?;
            let vb = column_values_for(ds_raw, col, members_b)?;
            let distance = wasserstein_1d(&va, &vb)?;
            let threshold_used = feature_threshold(ds_raw, col, thresholds)?;
            Ok(FeatureComparison {
                feature: ds_raw.columns()[col].name.clone(),
                distance,
                threshold_used,
                principal: distance >= threshold_used,
            })
        })
        .collect()
}

/// Resolves feature names to column indices, ordered as in the dataset.
fn feature_columns(ds: &Dataset, features: &[String]) -> Result<Vec<usize>> {
    let mut cols = Vec::with_capacity(features.len());
    for name in features {
        let col = ds
            .column_index(name)
            .ok_or_else(|| ClifError::Schema(format!("unknown feature `{name}`")))?;
        cols.push(col);
    }
    cols.sort_unstable();
    Ok(cols)
}

/// Findings for every unordered pair of the given clusters, lower cluster
/// id first, features in dataset column order. Fewer than two clusters
/// yield an empty report.
pub fn pfi_report(
    iteration: usize,
    clusters: &[ClusterInfo],
    ds_raw: &Dataset,
    features: &[String],
    thresholds: &PfiThresholds,
) -> Result<Vec<PrincipalFeatureFinding>> {
    if clusters.len() < 2 {
        return Ok(Vec::new());
    }
    let mut by_id: Vec<&ClusterInfo> = clusters.iter().collect();
    by_id.sort_by_key(|c| c.cluster_id);

    let mut pairs = Vec::new();
    for (i, a) in by_id.iter().enumerate() {
        for b in &by_id[i + 1..] {
            pairs.push((*a, *b));
        }
    }
    let per_pair: Vec<Result<Vec<PrincipalFeatureFinding>>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let comparisons =
                principal_features(ds_raw, &a.member_rows, &b.member_rows, features, thresholds)?;
            Ok(comparisons
                .into_iter()
                .map(|c| PrincipalFeatureFinding {
                    iteration,
                    cluster_a: a.cluster_id,
                    cluster_b: b.cluster_id,
                    feature: c.feature,
                    distance: c.distance,
                    threshold_used: c.threshold_used,
                    principal: c.principal,
                })
                .collect())
        })
        .collect();
    let mut findings = Vec::new();
    for result in per_pair {
        findings.extend(result?);
    }
    Ok(findings)
}
