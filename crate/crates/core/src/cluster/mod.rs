//! Density-based clustering: a pluggable clusterer contract and a complete
//! implementation of hierarchical density-based clustering (core distances,
//! mutual-reachability spanning tree, condensed tree, excess-of-mass
//! extraction).

mod condense;
mod mst;

pub use condense::condense_and_extract;
pub use mst::{core_distances, mutual_reachability_mst, MstEdge};

use serde::{Deserialize, Serialize};

use crate::error::{ClifError, Result};
use crate::matrix::FeatureMatrix;

/// Label reserved for points assigned to no cluster.
pub const NOISE: i64 = -1;

/// Per-row cluster assignment. Cluster ids are contiguous from 0; -1 marks
/// noise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<i64>,
    n_clusters: usize,
}

impl ClusterLabels {
    /// Validates contiguity: every non-noise label lies in `[0, k)` and
    /// every id below `k` occurs at least once.
    pub fn from_labels(labels: Vec<i64>) -> Result<Self> {
        let max = labels.iter().copied().max().unwrap_or(NOISE);
        let n_clusters = if max < 0 { 0 } else { (max + 1) as usize };
        let mut seen = vec![false; n_clusters];
        for &l in &labels {
            if l < NOISE || l >= n_clusters as i64 {
                return Err(ClifError::Data(format!("label {l} out of range")));
            }
            if l >= 0 {
                seen[l as usize] = true;
            }
        }
        if let Some(gap) = seen.iter().position(|&s| !s) {
            return Err(ClifError::Data(format!(
                "cluster ids not contiguous: {gap} unused"
            )));
        }
        Ok(ClusterLabels { labels, n_clusters })
    }

    pub fn all_noise(n: usize) -> Self {
        ClusterLabels {
            labels: vec![NOISE; n],
            n_clusters: 0,
        }
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    /// Row indices assigned to the given cluster, ascending.
    pub fn members_of(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster as i64)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

/// Hyperparameters for the density-based clusterer. The metric is fixed to
/// Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams {
            min_cluster_size: 5,
            min_samples: 5,
        }
    }
}

impl HdbscanParams {
    pub fn new(min_cluster_size: usize, min_samples: usize) -> Result<Self> {
        let params = HdbscanParams {
            min_cluster_size,
            min_samples,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(ClifError::Config("min_cluster_size must be >= 2".into()));
        }
        if self.min_samples < 1 {
            return Err(ClifError::Config("min_samples must be >= 1".into()));
        }
        if self.min_samples > self.min_cluster_size {
            return Err(ClifError::Config(
                "min_samples must not exceed min_cluster_size".into(),
            ));
        }
        Ok(())
    }
}

/// Contract every clustering backend satisfies: a feature matrix maps to
/// contiguous cluster labels with -1 noise. The iteration engine depends
/// only on this trait, so any algorithm honoring the label invariants can
/// drive it.
pub trait Clusterer: Sync {
    fn cluster(&self, points: &FeatureMatrix) -> Result<ClusterLabels>;

    /// Smallest row count the implementation can cluster; fewer surviving
    /// rows terminates the iteration loop.
    fn min_viable_rows(&self) -> usize;
}

/// Hierarchical density-based clusterer over Euclidean distance.
#[derive(Debug, Clone, Default)]
pub struct Hdbscan {
    pub params: HdbscanParams,
}

impl Hdbscan {
    pub fn new(params: HdbscanParams) -> Result<Self> {
        params.validate()?;
        Ok(Hdbscan { params })
    }
}

impl Clusterer for Hdbscan {
    fn cluster(&self, points: &FeatureMatrix) -> Result<ClusterLabels> {
        hdbscan(points, &self.params)
    }

    fn min_viable_rows(&self) -> usize {
        self.params.min_cluster_size.max(2)
    }
}

/// Runs the full pipeline: core distances, mutual-reachability spanning
/// tree, condensed tree, excess-of-mass extraction.
pub fn hdbscan(points: &FeatureMatrix, params: &HdbscanParams) -> Result<ClusterLabels> {
    params.validate()?;
    let n = points.n_rows();
    if n < 2 {
        return Err(ClifError::Data(format!("need at least 2 points, got {n}")));
    }
    if n < params.min_cluster_size {
        return Ok(ClusterLabels::all_noise(n));
    }
    // min_samples is capped at n - 1 so small remainders stay clusterable.
    let min_samples = params.min_samples.min(n - 1);
    let cores = core_distances(points, min_samples)?;
    let mst = mutual_reachability_mst(points, &cores)?;
    condense_and_extract(&mst, n, params.min_cluster_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_validate_contiguity() {
        assert!(ClusterLabels::from_labels(vec![0, 1, -1, 0]).is_ok());
        assert!(ClusterLabels::from_labels(vec![0, 2, -1]).is_err());
        assert!(ClusterLabels::from_labels(vec![-2]).is_err());
        let l = ClusterLabels::from_labels(vec![-1, -1]).unwrap();
        assert_eq!(l.n_clusters(), 0);
        assert_eq!(l.noise_count(), 2);
    }

    #[test]
    fn members_are_sorted() {
        let l = ClusterLabels::from_labels(vec![1, 0, 1, -1, 0]).unwrap();
        assert_eq!(l.members_of(0), vec![1, 4]);
        assert_eq!(l.members_of(1), vec![0, 2]);
    }

    #[test]
    fn params_validation() {
        assert!(HdbscanParams::new(5, 5).is_ok());
        assert!(HdbscanParams::new(1, 1).is_err());
        assert!(HdbscanParams::new(5, 6).is_err());
        assert!(HdbscanParams::new(5, 0).is_err());
    }

    #[test]
    fn hdbscan_small_input_is_noise_not_error() {
        let m = FeatureMatrix::from_rows(vec![vec![0.0], vec![1.0], vec![2.0]]);
        let labels = hdbscan(&m, &HdbscanParams::new(5, 5).unwrap()).unwrap();
        assert_eq!(labels.labels(), &[-1, -1, -1]);
        let one = FeatureMatrix::from_rows(vec![vec![0.0]]);
        assert!(hdbscan(&one, &HdbscanParams::default()).is_err());
    }

    #[test]
    fn hdbscan_separates_two_groups() {
        let mut rows = Vec::new();
        for i in 0..10 {
            rows.push(vec![i as f64 * 0.01, 0.0]);
        }
        for i in 0..10 {
            rows.push(vec![5.0 + i as f64 * 0.01, 0.0]);
        }
        let m = FeatureMatrix::from_rows(rows);
        let labels = hdbscan(&m, &HdbscanParams::new(4, 4).unwrap()).unwrap();
        assert_eq!(labels.n_clusters(), 2);
        assert_eq!(labels.labels()[0], 0);
        assert_eq!(labels.labels()[19], 1);
    }
}
