//! Cluster density scoring: each cluster is summarized by its medoid, and
//! density is derived from the mean distance between the medoid and its k
//! nearest fellow members. Medoids are used instead of centroids because
//! clusters need not be spherical and a medoid is always an actual data
//! point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterLabels;
use crate::error::{ClifError, Result};
use crate::matrix::FeatureMatrix;

/// One cluster's identity within an iteration: its members (as row indices
/// into the full dataset), medoid, size, and density score in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInfo {
    pub cluster_id: usize,
    pub member_rows: Vec<usize>,
    pub medoid_row: usize,
    pub size: usize,
    pub density: f64,
}

/// Index of the member minimizing the summed Euclidean distance to all
/// other members. Ties break to the lowest index.
pub fn medoid(members: &FeatureMatrix) -> Result<usize> {
    let m = members.n_rows();
    if m == 0 {
        return Err(ClifError::Data(
            "cannot take the medoid of an empty cluster".into(),
        ));
    }
    let sums: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| (0..m).map(|j| members.dist(i, j)).sum())
        .collect();
    let mut best = 0;
    for (i, &s) in sums.iter().enumerate().skip(1) {
        if s < sums[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Density of a cluster from the medoid's k-nearest-neighbor distances:
/// 1 / (1 + mean distance to the min(k, size - 1) nearest other members).
///
/// Identical points give density 1.0; the score decays toward 0 as the
/// neighborhood spreads out. Singletons score 1.0 by convention (there is
/// nothing to average).
pub fn cluster_density(members: &FeatureMatrix, medoid_idx: usize, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(ClifError::Config("k_neighbors must be >= 1".into()));
    }
    let m = members.n_rows();
    if medoid_idx >= m {
        return Err(ClifError::Data(format!(
            "medoid index {medoid_idx} out of range for {m} members"
        )));
    }
    let neighbors = k.min(m.saturating_sub(1));
    if neighbors == 0 {
        return Ok(1.0);
    }
    let mut dists: Vec<f64> = (0..m)
        .filter(|&j| j != medoid_idx)
        .map(|j| members.dist(medoid_idx, j))
        .collect();
    dists.select_nth_unstable_by(neighbors - 1, f64::total_cmp);
    let mean = dists[..neighbors].iter().sum::<f64>() / neighbors as f64;
    Ok(1.0 / (1.0 + mean))
}

/// Builds one [`ClusterInfo`] per non-noise cluster and sorts them by
/// density, descending; ties break toward the lower cluster id. Noise rows
/// are excluded. Row indices in the result refer to rows of `points`.
pub fn density_ranking(
    labels: &ClusterLabels,
    points: &FeatureMatrix,
    k: usize,
) -> Result<Vec<ClusterInfo>> {
    if labels.len() != points.n_rows() {
        return Err(ClifError::Data(format!(
            "{} labels for {} rows",
            labels.len(),
            points.n_rows()
        )));
    }
    let mut infos = Vec::with_capacity(labels.n_clusters());
    for cluster_id in 0..labels.n_clusters() {
        let member_rows = labels.members_of(cluster_id);
        let members = points.select_rows(&member_rows);
        let medoid_idx = medoid(&members)?;
        let density = cluster_density(&members, medoid_idx, k)?;
        infos.push(ClusterInfo {
            cluster_id,
            medoid_row: member_rows[medoid_idx],
            size: member_rows.len(),
            member_rows,
            density,
        });
    }
    infos.sort_by(|a, b| {
        b.density
            .total_cmp(&a.density)
            .then_with(|| a.cluster_id.cmp(&b.cluster_id))
    });
    Ok(infos)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn medoid_of_identical_members_is_first() {
        let m = matrix(&[&[2.0], &[2.0], &[2.0]]);
        assert_eq!(medoid(&m).unwrap(), 0);
    }

    #[test]
    fn medoid_minimizes_distance_sums() {
        // distance sums: 0 -> 11, 1 -> 10, 10 -> 19
        let m = matrix(&[&[0.0], &[1.0], &[10.0]]);
        assert_eq!(medoid(&m).unwrap(), 1);
    }

    #[test]
    fn medoid_of_singleton_is_itself() {
        let m = matrix(&[&[3.0, 4.0]]);
        assert_eq!(medoid(&m).unwrap(), 0);
    }

    #[test]
    fn medoid_of_empty_errors() {
        let m = FeatureMatrix::from_rows(Vec::new());
        assert!(medoid(&m).is_err());
    }

    #[test]
    fn density_of_identical_points_is_one() {
        let m = matrix(&[&[1.0], &[1.0], &[1.0]]);
        assert_eq!(cluster_density(&m, 0, 5).unwrap(), 1.0);
    }

    #[test]
    fn density_at_unit_neighbor_distance_is_half() {
        // medoid at the origin, 5 neighbors all at distance 1
        let m = matrix(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[-1.0, 0.0],
            &[0.0, 1.0],
            &[0.0, -1.0],
            &[
                std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
            ],
        ]);
        let d = cluster_density(&m, 0, 5).unwrap();
        assert!((d - 0.5).abs() < 1e-12, "{d}");
    }

    #[test]
    fn density_uses_nearest_members_only() {
        // k = 1: only the nearest neighbor (distance 1) counts
        let m = matrix(&[&[0.0], &[1.0], &[50.0]]);
        let d = cluster_density(&m, 0, 1).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singleton_density_is_one() {
        let m = matrix(&[&[9.0]]);
        assert_eq!(cluster_density(&m, 0, 5).unwrap(), 1.0);
    }

    #[test]
    fn ranking_sorts_by_density() {
        // cluster 0: spread pair; cluster 1: identical pair
        let points = matrix(&[&[0.0], &[2.0], &[10.0], &[10.0]]);
        let labels = ClusterLabels::from_labels(vec![0, 0, 1, 1]).unwrap();
        let ranking = density_ranking(&labels, &points, 5).unwrap();
        assert_eq!(ranking.len(), 2);
        assert_eq!(ranking[0].cluster_id, 1);
        assert_eq!(ranking[0].density, 1.0);
        assert_eq!(ranking[0].size, 2);
        assert!(ranking[1].density < 1.0);
        assert_eq!(ranking[1].member_rows, vec![0, 1]);
    }

    #[test]
    fn ranking_excludes_noise_and_handles_empty() {
        let points = matrix(&[&[0.0], &[1.0]]);
        let labels = ClusterLabels::all_noise(2);
        let ranking = density_ranking(&labels, &points, 5).unwrap();
        assert!(ranking.is_empty());
    }

    #[test]
    fn ranking_monotone_in_spread() {
        // five clusters of 6 points each, spreads increasing
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, spread) in [0.01, 0.05, 0.1, 0.5, 1.0].iter().enumerate() {
            for i in 0..6 {
                rows.push(vec![c as f64 * 100.0 + i as f64 * spread]);
                labels.push(c as i64);
            }
        }
        let points = FeatureMatrix::from_rows(rows);
        let labels = ClusterLabels::from_labels(labels).unwrap();
        let ranking = density_ranking(&labels, &points, 5).unwrap();
        let ids: Vec<usize> = ranking.iter().map(|c| c.cluster_id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
    }
}
