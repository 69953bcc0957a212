//! Core distances and the mutual-reachability minimum spanning tree.

use rayon::prelude::*;

use crate::error::{ClifError, Result};
use crate::matrix::FeatureMatrix;

/// Row count below which the Prim scan runs serially; the parallel split
/// only pays off on large frontiers.
const PARALLEL_CUTOFF: usize = 2_000;

/// One edge of the spanning tree, weighted by mutual reachability distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Distance from each point to its `min_samples`-th nearest neighbor,
/// excluding the point itself.
pub fn core_distances(points: &FeatureMatrix, min_samples: usize) -> Result<Vec<f64>> {
    if min_samples < 1 {
        return Err(ClifError::Config("min_samples must be >= 1".into()));
    }
    let n = points.n_rows();
    if n <= min_samples {
        return Err(ClifError::Data(format!(
            "need more than min_samples = {min_samples} points, got {n}"
        )));
    }
    let cores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            // The self-distance contributes exactly one zero, so the
            // min_samples-th neighbor sits at index min_samples once the
            // full row is ordered.
            let mut dists: Vec<f64> = (0..n).map(|j| points.sq_dist(i, j)).collect();
            let (_, kth, _) = dists.select_nth_unstable_by(min_samples, f64::total_cmp);
            kth.sqrt()
        })
        .collect();
    Ok(cores)
}

#[inline]
fn mutual_reach_sq(points: &FeatureMatrix, sq_cores: &[f64], a: usize, b: usize) -> f64 {
    points.sq_dist(a, b).max(sq_cores[a]).max(sq_cores[b])
}

/// Candidate vertex tracked by the Prim frontier.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    vertex: usize,
    best_sq: f64,
    from: usize,
}

/// Minimum spanning tree of the complete graph under mutual reachability
/// distance, built with Prim's algorithm in O(n^2) time and O(n) memory.
///
/// Ties between equal-weight candidates resolve to the lower vertex index,
/// so the edge list is reproducible across runs.
pub fn mutual_reachability_mst(points: &FeatureMatrix, cores: &[f64]) -> Result<Vec<MstEdge>> {
    let n = points.n_rows();
    if cores.len() != n {
        return Err(ClifError::Data(format!(
            "{} core distances for {n} points",
            cores.len()
        )));
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    let sq_cores: Vec<f64> = cores.iter().map(|c| c * c).collect();

    let mut frontier: Vec<Candidate> = (1..n)
        .map(|vertex| Candidate {
            vertex,
            best_sq: mutual_reach_sq(points, &sq_cores, 0, vertex),
            from: 0,
        })
        .collect();

    let mut edges = Vec::with_capacity(n - 1);
    let mut latest = 0usize;
    while !frontier.is_empty() {
        let update = |cand: &mut Candidate| -> (f64, usize) {
            let d = mutual_reach_sq(points, &sq_cores, latest, cand.vertex);
            if d < cand.best_sq {
                cand.best_sq = d;
                cand.from = latest;
            }
            (cand.best_sq, cand.vertex)
        };
        let pick = |a: (f64, usize), b: (f64, usize)| if b < a { b } else { a };
        let (_, vertex) = if frontier.len() >= PARALLEL_CUTOFF {
            frontier
                .par_iter_mut()
                .map(update)
                .reduce(|| (f64::INFINITY, usize::MAX), pick)
        } else {
            frontier
                .iter_mut()
                .map(update)
                .fold((f64::INFINITY, usize::MAX), pick)
        };
        let pos = frontier
            .iter()
            .position(|c| c.vertex == vertex)
            .expect("chosen vertex is on the frontier");
        let chosen = frontier.swap_remove(pos);
        edges.push(MstEdge {
            a: chosen.from,
            b: chosen.vertex,
            weight: chosen.best_sq.sqrt(),
        });
        latest = chosen.vertex;
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn collinear_core_distances() {
        let m = matrix(&[&[0.0], &[1.0], &[2.0]]);
        let cores = core_distances(&m, 1).unwrap();
        assert_eq!(cores, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn duplicate_points_have_zero_core() {
        let m = matrix(&[&[1.0, 1.0], &[1.0, 1.0], &[5.0, 5.0]]);
        let cores = core_distances(&m, 1).unwrap();
        assert_eq!(cores[0], 0.0);
        assert_eq!(cores[1], 0.0);
        assert!(cores[2] > 0.0);
    }

    #[test]
    fn core_distance_matches_full_sort() {
        // brute-force oracle: full sorted distance row.
        let mut vals = Vec::new();
        let mut state = 123u64;
        for _ in 0..40 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            vals.push((state >> 33) as f64 / (1u64 << 31) as f64);
        }
        let rows: Vec<Vec<f64>> = vals.chunks(2).map(|c| c.to_vec()).collect();
        let m = FeatureMatrix::from_rows(rows);
        let min_samples = 3;
        let cores = core_distances(&m, min_samples).unwrap();
        for (i, &core) in cores.iter().enumerate() {
            let mut ds: Vec<f64> = (0..m.n_rows())
                .filter(|&j| j != i)
                .map(|j| m.dist(i, j))
                .collect();
            ds.sort_by(f64::total_cmp);
            assert!(
                (core - ds[min_samples - 1]).abs() < 1e-12,
                "row {i}: {core} vs {}",
                ds[min_samples - 1]
            );
        }
    }

    #[test]
    fn core_distance_requires_enough_points() {
        let m = matrix(&[&[0.0], &[1.0]]);
        assert!(core_distances(&m, 2).is_err());
        assert!(core_distances(&m, 0).is_err());
    }

    #[test]
    fn two_points_forced_edge() {
        let m = matrix(&[&[0.0], &[3.0]]);
        let cores = vec![3.0, 3.0];
        let mst = mutual_reachability_mst(&m, &cores).unwrap();
        assert_eq!(mst.len(), 1);
        assert_eq!(mst[0].weight, 3.0);
        assert_eq!((mst[0].a, mst[0].b), (0, 1));
    }

    #[test]
    fn equal_edge_tie_break_prefers_lower_index() {
        // edges (0,1) and (0,2) tie at exactly 1.0
        let m = matrix(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let cores = core_distances(&m, 1).unwrap();
        let mst = mutual_reachability_mst(&m, &cores).unwrap();
        let total: f64 = mst.iter().map(|e| e.weight).sum();
        assert!((total - 2.0).abs() < 1e-12);
        // Lower-index tie-break: both edges leave vertex 0, and the tied
        // candidates are claimed in index order.
        assert_eq!((mst[0].a, mst[0].b), (0, 1));
        assert_eq!((mst[1].a, mst[1].b), (0, 2));
    }

    #[test]
    fn mutual_reachability_dominates_euclidean() {
        let m = matrix(&[&[0.0, 0.0], &[0.1, 0.0], &[4.0, 0.0], &[4.2, 0.0]]);
        let cores = core_distances(&m, 2).unwrap();
        let mst = mutual_reachability_mst(&m, &cores).unwrap();
        for e in &mst {
            assert!(e.weight + 1e-15 >= m.dist(e.a, e.b));
        }
        assert_eq!(mst.len(), 3);
    }
}
