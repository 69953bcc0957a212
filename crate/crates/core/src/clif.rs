//! The iterative dense-cluster extraction engine: cluster the surviving
//! rows, rank clusters by density, extract the dense ones (recording large
//! sparse ones), remove the extracted rows, and repeat until no dense
//! cluster remains.
//!
//! Dense clusters mask subtler structure; removing them and re-clustering
//! exposes dense sub-clusters in the remainder. Sparse clusters are flagged
//! for analysis but never removed between iterations.

use serde::{Deserialize, Serialize};

use crate::cluster::{Clusterer, HdbscanParams};
use crate::density::{density_ranking, ClusterInfo};
use crate::error::{ClifError, Result};
use crate::tabular::Dataset;

/// Configuration of the iteration loop.
///
/// `sparse_min_size: None` applies the default rule: twenty times the mean
/// size of the iteration's dense clusters, rounded up. With no dense
/// clusters in the iteration and no explicit size, no sparse cluster is
/// flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClifConfig {
    pub dense_threshold: f64,
    pub sparse_low: f64,
    pub sparse_min_size: Option<usize>,
    pub k_neighbors: usize,
    pub max_iterations: usize,
    pub clusterer: HdbscanParams,
    pub seed: u64,
}

impl Default for ClifConfig {
    fn default() -> Self {
        ClifConfig {
            dense_threshold: 0.85,
            sparse_low: 0.65,
            sparse_min_size: None,
            k_neighbors: 5,
            max_iterations: 50,
            clusterer: HdbscanParams::default(),
            seed: 0,
        }
    }
}

impl ClifConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dense_threshold > 0.0 && self.dense_threshold <= 1.0) {
            return Err(ClifError::Config(format!(
                "dense_threshold must be in (0, 1], got {}",
                self.dense_threshold
            )));
        }
        if !(self.sparse_low > 0.0 && self.sparse_low < self.dense_threshold) {
            return Err(ClifError::Config(format!(
                "sparse_low must satisfy 0 < sparse_low < dense_threshold, got {}",
                self.sparse_low
            )));
        }
        if self.k_neighbors < 1 {
            return Err(ClifError::Config("k_neighbors must be >= 1".into()));
        }
        if self.max_iterations < 1 {
            return Err(ClifError::Config("max_iterations must be >= 1".into()));
        }
        self.clusterer.validate()
    }
}

/// Multiplier behind the default sparse size rule.
const SPARSE_SIZE_FACTOR: f64 = 20.0;

/// Everything one iteration saw and did. Clusters are density-sorted; row
/// indices inside [`ClusterInfo`] refer to the original dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iteration: usize,
    pub all_clusters: Vec<ClusterInfo>,
    pub dense_extracted: Vec<ClusterInfo>,
    pub sparse_flagged: Vec<ClusterInfo>,
    /// Row ids removed by this iteration's dense extraction.
    pub rows_removed: Vec<String>,
    pub rows_remaining: usize,
}

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    NoDenseClusters,
    TooFewRows,
    MaxIterations,
}

impl std::fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TerminalReason::NoDenseClusters => write!(f, "no_dense_clusters"),
            TerminalReason::TooFewRows => write!(f, "too_few_rows"),
            TerminalReason::MaxIterations => write!(f, "max_iterations"),
        }
    }
}

/// Full provenance of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClifResult {
    pub iterations: Vec<IterationRecord>,
    pub terminal_reason: TerminalReason,
}

/// Splits a density-sorted ranking into dense and flagged-sparse clusters.
///
/// Dense clusters meet the dense threshold. Sparse clusters sit in
/// `[sparse_low, dense_threshold)` and are at least `sparse_min_size` large
/// (or the default rule's size, derived from this iteration's dense
/// clusters).
pub fn partition_clusters(
    ranked: &[ClusterInfo],
    cfg: &ClifConfig,
) -> (Vec<ClusterInfo>, Vec<ClusterInfo>) {
    let dense: Vec<ClusterInfo> = ranked
        .iter()
        .filter(|c| c.density >= cfg.dense_threshold)
        .cloned()
        .collect();
    let min_size = match cfg.sparse_min_size {
        Some(s) => Some(s),
        None if dense.is_empty() => None,
        None => {
            let mean = dense.iter().map(|c| c.size as f64).sum::<f64>() / dense.len() as f64;
            Some((SPARSE_SIZE_FACTOR * mean).ceil() as usize)
        }
    };
    let sparse: Vec<ClusterInfo> = match min_size {
        None => Vec::new(),
        Some(min_size) => ranked
            .iter()
            .filter(|c| {
                c.density >= cfg.sparse_low && c.density < cfg.dense_threshold && c.size >= min_size
            })
            .cloned()
            .collect(),
    };
    (dense, sparse)
}

/// Runs the iteration loop over an encoded, scaled dataset.
///
/// Each iteration re-clusters only the surviving rows; extracted rows never
/// reappear. The final iteration with an empty dense set is recorded
/// explicitly, so a run that terminates normally always ends with a record
/// whose `dense_extracted` is empty.
pub fn run_clif(ds: &Dataset, clusterer: &dyn Clusterer, cfg: &ClifConfig) -> Result<ClifResult> {
    cfg.validate()?;
    if ds.n_rows() == 0 {
        return Err(ClifError::Data("dataset has no rows".into()));
    }
    let matrix = ds.to_matrix()?;
    let row_ids = ds.row_ids();

    let mut alive: Vec<usize> = (0..ds.n_rows()).collect();
    let mut iterations = Vec::new();
    let terminal_reason = loop {
        if alive.len() < clusterer.min_viable_rows() {
            break TerminalReason::TooFewRows;
        }
        let iteration = iterations.len() + 1;
        let sub = matrix.select_rows(&alive);
        let labels = clusterer.cluster(&sub)?;
        let mut ranked = density_ranking(&labels, &sub, cfg.k_neighbors)?;
        // map local row indices back onto the original dataset
        for info in ranked.iter_mut() {
            info.medoid_row = alive[info.medoid_row];
            for row in info.member_rows.iter_mut() {
                *row = alive[*row];
            }
        }
        let (dense, sparse) = partition_clusters(&ranked, cfg);

        let mut removed: Vec<usize> = dense
            .iter()
            .flat_map(|c| c.member_rows.iter().copied())
            .collect();
        removed.sort_unstable();
        removed.dedup();
        let rows_removed: Vec<String> = removed.iter().map(|&i| row_ids[i].clone()).collect();
        alive.retain(|i| removed.binary_search(i).is_err());

        let dense_empty = dense.is_empty();
        iterations.push(IterationRecord {
            iteration,
            all_clusters: ranked,
            dense_extracted: dense,
            sparse_flagged: sparse,
            rows_removed,
            rows_remaining: alive.len(),
        });
        if dense_empty {
            break TerminalReason::NoDenseClusters;
        }
        if iteration == cfg.max_iterations {
            break TerminalReason::MaxIterations;
        }
    };
    Ok(ClifResult {
        iterations,
        terminal_reason,
    })
}
