//! Integer-weighted neighbor graph and micro-cluster extraction.
//!
//! Every pruning round adds weight-1 edges from a detected representative
//! to its neighbors; runs and ensemble members merge by summing weights.
//! Cluster extraction drops weak edges below the first large drop in the
//! sorted weight list and reports connected components of what survives.

use std::collections::BTreeMap;

use crate::model::{Error, IndexSet, Result};
use crate::peaks::{find_first_drop, DEFAULT_SIGMA_MULT};

/// Pairwise-disjoint clusters, each sorted ascending, ordered by smallest
/// member.
pub type MicroClusterSet = Vec<IndexSet>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    n: usize,
    weights: BTreeMap<(usize, usize), u64>,
}

impl NeighborGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            weights: BTreeMap::new(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> u64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.weights.get(&key).copied().unwrap_or(0)
    }

    /// Edges as `((i, j), weight)` with `i < j`, in key order.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    /// Increments the weight of `(center, y)` for every neighbor `y`,
    /// skipping `y == center`.
    pub fn bump_edges(&mut self, center: usize, neighbors: &IndexSet) {
        debug_assert!(center < self.n);
        for y in neighbors {
            if y == center {
                continue;
            }
            debug_assert!(y < self.n);
            let key = if center < y { (center, y) } else { (y, center) };
            *self.weights.entry(key).or_insert(0) += 1;
        }
    }

    /// Adds every edge weight of `other` into this graph.
    pub fn merge(&mut self, other: &NeighborGraph) -> Result<()> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "cannot merge graphs over {} and {} nodes",
                self.n, other.n
            )));
        }
        for (key, w) in &other.weights {
            *self.weights.entry(*key).or_insert(0) += w;
        }
        Ok(())
    }
}

/// Extracts micro-clusters from the strong-edge subgraph.
///
/// The weight list (distinct values when `distinct_weights`, every edge's
/// weight otherwise) is sorted descending and thresholded at its first
/// large drop; edges strictly above the threshold survive. When no drop
/// exists (constant weights, or fewer than two list entries) every edge
/// survives. Components are restricted to nodes with at least one
/// surviving edge and must have two or more members.
pub fn find_clusters(
    g: &NeighborGraph,
    sigma_mult: f64,
    distinct_weights: bool,
) -> MicroClusterSet {
    if g.weights.is_empty() {
        return Vec::new();
    }

    let mut w: Vec<u64> = g.weights.values().copied().collect();
    if distinct_weights {
        w.sort_unstable();
        w.dedup();
        w.reverse();
    } else {
        w.sort_unstable_by(|a, b| b.cmp(a));
    }
    let w_f64: Vec<f64> = w.iter().map(|&x| x as f64).collect();

    let tau_e = if w_f64.len() < 2 {
        None
    } else {
        let drop = find_first_drop(&w_f64, sigma_mult).expect("length checked");
        drop.found.then_some(drop.threshold)
    };

    let mut parent: Vec<usize> = (0..g.n).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    let mut has_edge = vec![false; g.n];
    for (&(i, j), &weight) in &g.weights {
        if let Some(tau) = tau_e {
            if weight as f64 <= tau {
                continue;
            }
        }
        has_edge[i] = true;
        has_edge[j] = true;
        let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..g.n {
        if has_edge[i] {
            groups.entry(root(&mut parent, i)).or_default().push(i);
        }
    }

    groups
        .into_values()
        .filter(|members| members.len() >= 2)
        .map(IndexSet::from_sorted)
        .collect()
}

/// [`find_clusters`] with the default drop-detector settings.
pub fn find_clusters_default(g: &NeighborGraph) -> MicroClusterSet {
    find_clusters(g, DEFAULT_SIGMA_MULT, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize, u64)]) -> NeighborGraph {
        let mut g = NeighborGraph::new(n);
        for &(i, j, w) in edges {
            for _ in 0..w {
                g.bump_edges(i, &IndexSet::from_sorted(vec![j]));
            }
        }
        g
    }

    #[test]
    fn bump_accumulates_and_skips_self() {
        let mut g = NeighborGraph::new(3);
        g.bump_edges(0, &IndexSet::from_sorted(vec![1, 2]));
        assert_eq!(g.weight(0, 1), 1);
        assert_eq!(g.weight(2, 0), 1);
        g.bump_edges(0, &IndexSet::from_sorted(vec![1, 2]));
        assert_eq!(g.weight(0, 1), 2);
        assert_eq!(g.weight(0, 2), 2);
        g.bump_edges(0, &IndexSet::from_sorted(vec![0, 1]));
        assert_eq!(g.weight(0, 1), 3);
        assert_eq!(g.weight(0, 0), 0);
    }

    #[test]
    fn merge_sums_weights() {
        let g1 = graph(3, &[(0, 1, 2)]);
        let g2 = graph(3, &[(0, 1, 3), (1, 2, 1)]);
        let mut merged = g1.clone();
        merged.merge(&g2).unwrap();
        assert_eq!(merged.weight(0, 1), 5);
        assert_eq!(merged.weight(1, 2), 1);

        let mut other_way = g2.clone();
        other_way.merge(&g1).unwrap();
        assert_eq!(merged, other_way);

        let mut with_empty = g1.clone();
        with_empty.merge(&NeighborGraph::new(3)).unwrap();
        assert_eq!(with_empty, g1);

        assert!(g1.clone().merge(&NeighborGraph::new(4)).is_err());
    }

    #[test]
    fn strong_edges_survive_the_drop() {
        let g = graph(7, &[(0, 1, 50), (1, 2, 49), (5, 6, 3)]);
        let clusters = find_clusters_default(&g);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn empty_graph_gives_no_clusters() {
        let g = NeighborGraph::new(5);
        assert!(find_clusters_default(&g).is_empty());
    }

    #[test]
    fn constant_weights_keep_everything() {
        let g = graph(6, &[(0, 1, 7), (2, 3, 7), (4, 5, 7)]);
        let clusters = find_clusters_default(&g);
        assert_eq!(clusters.len(), 3);
        assert_eq!(clusters[0].as_slice(), &[0, 1]);
        assert_eq!(clusters[1].as_slice(), &[2, 3]);
        assert_eq!(clusters[2].as_slice(), &[4, 5]);
    }

    #[test]
    fn single_distinct_weight_keeps_everything() {
        let g = graph(4, &[(0, 1, 4), (2, 3, 4)]);
        assert_eq!(find_clusters_default(&g).len(), 2);
    }

    #[test]
    fn clusters_disjoint_and_sorted() {
        let g = graph(
            10,
            &[(9, 8, 20), (8, 7, 20), (1, 0, 20), (4, 5, 20), (2, 3, 1)],
        );
        let clusters = find_clusters_default(&g);
        for c in &clusters {
            assert!(c.len() >= 2);
            assert!(c.as_slice().windows(2).all(|w| w[0] < w[1]));
        }
        for i in 1..clusters.len() {
            assert!(clusters[i - 1].as_slice()[0] < clusters[i].as_slice()[0]);
        }
        let mut all: Vec<usize> = clusters.iter().flat_map(|c| c.iter()).collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), total);
    }

    #[test]
    fn duplicate_weight_mode_changes_the_threshold() {
        // 200 pairs at weight 100, 200 pairs at weight 80, one pair at 2.
        // Distinct mode sees [100, 80, 2] and thresholds at the bigger
        // 80-to-2 drop, keeping both heavy tiers. Duplicate mode sees the
        // 100-to-80 step rise far above the diluted deviation bar and cuts
        // there, keeping only the weight-100 tier.
        let mut edges: Vec<(usize, usize, u64)> = Vec::new();
        for i in 0..200 {
            edges.push((2 * i, 2 * i + 1, 100));
        }
        for i in 0..200 {
            edges.push((400 + 2 * i, 401 + 2 * i, 80));
        }
        edges.push((800, 801, 2));
        let g = graph(802, &edges);
        let with_distinct = find_clusters(&g, DEFAULT_SIGMA_MULT, true);
        let with_duplicates = find_clusters(&g, DEFAULT_SIGMA_MULT, false);
        assert_eq!(with_distinct.len(), 400);
        assert_eq!(with_duplicates.len(), 200);
    }
}
