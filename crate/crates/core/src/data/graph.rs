//! k-nearest-neighbor graphs and all-pairs geodesic distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stress::compute_distance_matrix;
use crate::types::{validate_target, TargetMatrix};

/// Undirected weighted graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl NeighborGraph {
    /// Builds a graph from undirected edges; each edge is stored both ways
    /// and duplicates keep their smallest weight.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) out of range (N={n})")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) has weight {w}")));
            }
            if a == b {
                continue;
            }
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
            list.dedup_by_key(|e| e.0);
        }
        Ok(Self { adjacency })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }
}

/// Connects every point to its `k` nearest neighbors (Euclidean, ties to the
/// lower index) and symmetrizes by union.
pub fn knn_graph(points: ArrayView2<'_, f64>, k: usize) -> Result<NeighborGraph> {
    let n = points.nrows();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k < N, got k={k} N={n}"
        )));
    }
    let d = compute_distance_matrix(points)?;
    let d = &d;
    let edges: Vec<(usize, usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| d[[i, a]].total_cmp(&d[[i, b]]).then(a.cmp(&b)));
            order.truncate(k);
            order.into_iter().map(move |j| (i, j, d[[i, j]])).collect::<Vec<_>>()
        })
        .collect();
    NeighborGraph::from_edges(n, &edges)
}

/// Shortest-path routine used for geodesic distances. Both give identical
/// results on graphs with non-negative weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShortestPaths {
    #[default]
    Dijkstra,
    BellmanFord,
}

/// All-pairs shortest-path distances with Dijkstra from every source.
pub fn geodesic_distances(g: &NeighborGraph) -> Result<TargetMatrix> {
    geodesic_distances_with(g, ShortestPaths::Dijkstra)
}

pub fn geodesic_distances_with(g: &NeighborGraph, algo: ShortestPaths) -> Result<TargetMatrix> {
    let n = g.n();
    let components = g.components();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| match algo {
            ShortestPaths::Dijkstra => dijkstra(g, s),
            ShortestPaths::BellmanFord => bellman_ford(g, s),
        })
        .collect();
    let mut m = Array2::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[[i, j]] = v;
        }
    }
    validate_target(m.view())
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(g: &NeighborGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier { dist: 0.0, node: source });
    while let Some(Frontier { dist: du, node: u }) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let alt = du + w;
            if alt < dist[v] {
                dist[v] = alt;
                heap.push(Frontier { dist: alt, node: v });
            }
        }
    }
    dist
}

fn bellman_ford(g: &NeighborGraph, source: usize) -> Vec<f64> {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    for _ in 1..n.max(2) {
        let mut changed = false;
        for u in 0..n {
            let du = dist[u];
            if du.is_infinite() {
                continue;
            }
            for &(v, w) in g.neighbors(u) {
                if du + w < dist[v] {
                    dist[v] = du + w;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Pairwise Euclidean distances of `points` as a target matrix.
pub fn euclidean_target(points: ArrayView2<'_, f64>) -> Result<TargetMatrix> {
    let d = compute_distance_matrix(points)?;
    validate_target(d.view())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn collinear_nearest_neighbors() {
        let g = knn_graph(array![[0.0], [1.0], [2.0]].view(), 1).unwrap();
        assert_eq!(g.neighbors(0), &[(1, 1.0)]);
        assert_eq!(g.neighbors(1).iter().map(|e| e.0).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(g.neighbors(2), &[(1, 1.0)]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn ties_prefer_lower_index() {
        // Point 1 is equidistant from 0 and 2.
        let g = knn_graph(array![[0.0], [1.0], [2.0]].view(), 1).unwrap();
        assert!(g.neighbors(1).iter().any(|e| e.0 == 0));
    }

    #[test]
    fn full_k_is_complete() {
        let pts = array![[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 1.0]];
        let g = knn_graph(pts.view(), 3).unwrap();
        for i in 0..4 {
            assert_eq!(g.degree(i), 3);
        }
        let geo = geodesic_distances(&g).unwrap();
        let eu = euclidean_target(pts.view()).unwrap();
        for (a, b) in geo.values().iter().zip(eu.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_distance() {
        let g = NeighborGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let d = geodesic_distances(&g).unwrap();
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.get(2, 0), 2.0);
    }

    #[test]
    fn disconnected_reports_components() {
        let g = NeighborGraph::from_edges(5, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(g.components(), 3);
        assert!(matches!(geodesic_distances(&g), Err(Error::Disconnected { components: 3 })));
    }

    #[test]
    fn invalid_k() {
        let pts = array![[0.0], [1.0]];
        assert!(knn_graph(pts.view(), 0).is_err());
        assert!(knn_graph(pts.view(), 2).is_err());
    }
}
