//! Condensed-tree construction and excess-of-mass cluster extraction.
//!
//! The minimum spanning tree is removed edge-by-edge in descending weight
//! order (equivalently, the single-linkage dendrogram is walked top-down).
//! Splits where one side has fewer than `min_cluster_size` points are
//! treated as points falling out of the surviving cluster at
//! lambda = 1 / weight; splits with two viable sides create child clusters.
//! Cluster stability accumulates (lambda_leave - lambda_birth) over member
//! points, and flat clusters are the nodes whose stability exceeds the sum
//! of their chosen descendants'.

use super::mst::MstEdge;
use super::ClusterLabels;
use crate::error::{ClifError, Result};

/// Union-find over point indices with component size tracking.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Unions two roots, returning the surviving root.
    fn union(&mut self, a: usize, b: usize) -> usize {
        let (big, small) = if self.size[a] >= self.size[b] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        big
    }
}

/// Internal node of the single-linkage hierarchy. Children below `n` are
/// points; children at `n + i` refer to `nodes[i]`.
#[derive(Debug, Clone, Copy)]
struct SltNode {
    left: usize,
    right: usize,
    weight: f64,
    size: usize,
}

/// Builds the single-linkage hierarchy by merging MST edges in ascending
/// weight order. Ties break toward lower endpoint indices.
fn single_linkage(mst: &[MstEdge], n: usize) -> Vec<SltNode> {
    let mut edges: Vec<&MstEdge> = mst.iter().collect();
    edges.sort_by(|x, y| {
        x.weight
            .total_cmp(&y.weight)
            .then_with(|| (x.a.min(x.b), x.a.max(x.b)).cmp(&(y.a.min(y.b), y.a.max(y.b))))
    });

    let mut uf = UnionFind::new(n);
    // node id of the current component containing each root
    let mut component_node: Vec<usize> = (0..n).collect();
    let mut nodes = Vec::with_capacity(n.saturating_sub(1));
    for edge in edges {
        let ra = uf.find(edge.a);
        let rb = uf.find(edge.b);
        let left = component_node[ra];
        let right = component_node[rb];
        let size = uf.size[ra] + uf.size[rb];
        let id = n + nodes.len();
        nodes.push(SltNode {
            left,
            right,
            weight: edge.weight,
            size,
        });
        let root = uf.union(ra, rb);
        component_node[root] = id;
    }
    nodes
}

#[inline]
fn lambda_of(weight: f64) -> f64 {
    if weight > 0.0 {
        1.0 / weight
    } else {
        f64::INFINITY
    }
}

/// Difference of lambdas that treats two infinities as zero width, so
/// duplicate points (weight-0 merges) behave as immediately merged.
#[inline]
fn lambda_span(leave: f64, birth: f64) -> f64 {
    if leave == birth {
        0.0
    } else {
        leave - birth
    }
}

/// One node of the condensed tree. Node 0 is the root (all points).
#[derive(Debug, Clone)]
struct CondensedNode {
    parent: Option<usize>,
    birth_lambda: f64,
    children: Vec<usize>,
    /// Points leaving this node directly, with the lambda at which they left.
    points: Vec<(usize, f64)>,
    /// Points in the whole subtree.
    subtree_size: usize,
}

struct CondensedTree {
    nodes: Vec<CondensedNode>,
}

fn condense(slt: &[SltNode], n: usize, min_cluster_size: usize) -> CondensedTree {
    let mut nodes = vec![CondensedNode {
        parent: None,
        birth_lambda: 0.0,
        children: Vec::new(),
        points: Vec::new(),
        subtree_size: n,
    }];
    if n == 0 {
        return CondensedTree { nodes };
    }
    if slt.is_empty() {
        // single point: it leaves the root immediately
        nodes[0].points.push((0, f64::INFINITY));
        return CondensedTree { nodes };
    }

    let node_size = |id: usize| if id < n { 1 } else { slt[id - n].size };
    // Collect every point of an SLT subtree into the condensed node's
    // fall-out list at the given lambda.
    let spill = |id: usize, lambda: f64, out: &mut Vec<(usize, f64)>| {
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            if cur < n {
                out.push((cur, lambda));
            } else {
                let node = &slt[cur - n];
                stack.push(node.left);
                stack.push(node.right);
            }
        }
    };

    // (slt node, condensed node owning it)
    let mut stack = vec![(n + slt.len() - 1, 0usize)];
    while let Some((slt_id, cond_id)) = stack.pop() {
        let node = slt[slt_id - n];
        let lambda = lambda_of(node.weight);
        let left_big = node_size(node.left) >= min_cluster_size;
        let right_big = node_size(node.right) >= min_cluster_size;
        match (left_big, right_big) {
            (true, true) => {
                for child in [node.left, node.right] {
                    let id = nodes.len();
                    nodes.push(CondensedNode {
                        parent: Some(cond_id),
                        birth_lambda: lambda,
                        children: Vec::new(),
                        points: Vec::new(),
                        subtree_size: node_size(child),
                    });
                    nodes[cond_id].children.push(id);
                    if child >= n {
                        stack.push((child, id));
                    } else {
                        // only possible when min_cluster_size == 1
                        nodes[id].points.push((child, f64::INFINITY));
                    }
                }
            }
            (true, false) => {
                let mut spilled = Vec::new();
                spill(node.right, lambda, &mut spilled);
                nodes[cond_id].points.extend(spilled);
                stack.push((node.left, cond_id));
            }
            (false, true) => {
                let mut spilled = Vec::new();
                spill(node.left, lambda, &mut spilled);
                nodes[cond_id].points.extend(spilled);
                stack.push((node.right, cond_id));
            }
            (false, false) => {
                // the cluster dies here: everything below leaves at lambda
                let mut spilled = Vec::new();
                spill(node.left, lambda, &mut spilled);
                spill(node.right, lambda, &mut spilled);
                nodes[cond_id].points.extend(spilled);
            }
        }
    }
    CondensedTree { nodes }
}

impl CondensedTree {
    /// Stability of each node: sum over member points of the lambda span
    /// between joining (birth) and leaving, where points continuing into a
    /// child cluster leave at the child's birth.
    fn stabilities(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|node| {
                let mut s = 0.0;
                for &(_, lambda) in &node.points {
                    s += lambda_span(lambda, node.birth_lambda);
                }
                for &child in &node.children {
                    let c = &self.nodes[child];
                    s += c.subtree_size as f64 * lambda_span(c.birth_lambda, node.birth_lambda);
                }
                s
            })
            .collect()
    }

    /// Excess-of-mass selection over non-root nodes: a node is chosen iff
    /// its stability strictly exceeds the total propagated stability of its
    /// children; selected descendants of a chosen node are released.
    fn select_excess_of_mass(&self) -> Vec<usize> {
        let m = self.nodes.len();
        let stabilities = self.stabilities();
        let mut propagated = vec![0.0; m];
        let mut chosen = vec![false; m];
        // children always carry higher ids than their parent
        for id in (1..m).rev() {
            let child_sum: f64 = self.nodes[id].children.iter().map(|&c| propagated[c]).sum();
            if stabilities[id] > child_sum {
                chosen[id] = true;
                propagated[id] = stabilities[id];
            } else {
                propagated[id] = child_sum;
            }
        }
        // keep only chosen nodes with no chosen ancestor
        let mut shadowed = vec![false; m];
        for id in 1..m {
            let parent = self.nodes[id].parent.expect("non-root has a parent");
            if chosen[parent] || shadowed[parent] {
                shadowed[id] = true;
                chosen[id] = false;
            }
        }
        (1..m).filter(|&id| chosen[id]).collect()
    }

    /// All points in the subtree rooted at `id`.
    fn subtree_points(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes[id].subtree_size);
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            out.extend(self.nodes[cur].points.iter().map(|&(p, _)| p));
            stack.extend(&self.nodes[cur].children);
        }
        out
    }

    /// Fallback used when excess of mass selects nothing: points that
    /// persist at infinite lambda (weight-0 merges, i.e. exact duplicates
    /// surviving to the end of the hierarchy) still form a cluster.
    /// Structureless data has no such points and stays noise.
    fn root_membership(&self) -> Vec<usize> {
        self.nodes[0]
            .points
            .iter()
            .filter(|&&(_, lambda)| lambda == f64::INFINITY)
            .map(|&(p, _)| p)
            .collect()
    }
}

/// Extracts flat cluster labels from a spanning tree over `n` points.
///
/// Returns one label per point; -1 marks noise. Cluster ids are contiguous
/// from 0, assigned in order of each cluster's first member row. When
/// `min_cluster_size > n` every point is noise (not an error).
pub fn condense_and_extract(
    mst: &[MstEdge],
    n: usize,
    min_cluster_size: usize,
) -> Result<ClusterLabels> {
    if min_cluster_size < 2 {
        return Err(ClifError::Config("min_cluster_size must be >= 2".into()));
    }
    if min_cluster_size > n {
        return Ok(ClusterLabels::all_noise(n));
    }
    if mst.len() + 1 != n {
        return Err(ClifError::Data(format!(
            "spanning tree over {n} points needs {} edges, got {}",
            n.saturating_sub(1),
            mst.len()
        )));
    }

    let slt = single_linkage(mst, n);
    let tree = condense(&slt, n, min_cluster_size);
    let mut selected = tree.select_excess_of_mass();

    let mut member_sets: Vec<Vec<usize>>;
    if selected.is_empty() {
        let members = tree.root_membership();
        if members.len() >= min_cluster_size {
            member_sets = vec![members];
        } else {
            return Ok(ClusterLabels::all_noise(n));
        }
    } else {
        selected.sort_unstable();
        member_sets = selected.iter().map(|&id| tree.subtree_points(id)).collect();
    }

    // relabel clusters by their first member row index
    for members in member_sets.iter_mut() {
        members.sort_unstable();
    }
    member_sets.sort_by_key(|members| members[0]);

    let mut labels = vec![-1i64; n];
    for (cluster, members) in member_sets.iter().enumerate() {
        for &p in members {
            labels[p] = cluster as i64;
        }
    }
    ClusterLabels::from_labels(labels)
}
