//! Undirected simple graphs and the grounded systems built on top of them.

mod families;
mod grounded;
mod matrix;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use families::{complete, cycle, dumbbell, empty, path, star};
pub use grounded::GroundedSystem;
pub use matrix::SymMatrix;

/// Canonical vertex set: sorted ascending, no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Membership mask over `0..n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            if v < n {
                m[v] = true;
            }
        }
        m
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter)
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        VertexSet::new(v)
    }
}

impl From<&[usize]> for VertexSet {
    fn from(v: &[usize]) -> Self {
        VertexSet::new(v.iter().copied())
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(v: [usize; N]) -> Self {
        VertexSet::new(v)
    }
}

/// Undirected simple graph on vertices `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Neighbour lists
/// are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and builds a graph. Duplicate and reversed pairs collapse to
    /// one edge; self-loops and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::EndpointOutOfRange { u, v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        canon.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &canon {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canon,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn min_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Graph Laplacian `L = D - A` with exact integer entries.
    pub fn laplacian(&self) -> SymMatrix {
        let diag = (0..self.n).map(|v| (v, v, self.degree(v) as i64));
        let off = self.edges.iter().map(|&(u, v)| (u, v, -1));
        SymMatrix::from_upper_triplets(self.n, diag.chain(off))
            .expect("laplacian triplets are in range")
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n];
        let mut comps = Vec::new();
        let mut queue = VecDeque::new();
        for root in 0..self.n {
            if label[root] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![root];
            label[root] = id;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        members.push(w);
                        queue.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    /// Subgraph induced on `vertices`, relabelled `0..vertices.len()` in the
    /// order given.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut position = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            position[v] = i;
        }
        let edges = self.edges.iter().filter_map(|&(u, v)| {
            let (pu, pv) = (position[u], position[v]);
            (pu != usize::MAX && pv != usize::MAX).then_some((pu, pv))
        });
        Graph::new(vertices.len().max(1), edges).expect("induced subgraph is valid")
    }

    /// Adjacency bitmasks for graphs that fit in 64 bits.
    pub(crate) fn adjacency_masks(&self) -> Option<Vec<u64>> {
        (self.n <= 64).then(|| {
            self.adjacency
                .iter()
                .map(|nb| nb.iter().fold(0u64, |m, &w| m | (1 << w)))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 1]);
        assert!(g.is_connected());
    }

    #[test]
    fn triangle_degrees() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![2, 2, 2]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn rejects_self_loop() {
        assert_eq!(Graph::new(4, [(0, 1), (1, 1)]), Err(Error::SelfLoop(1)));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            Graph::new(3, [(0, 3)]),
            Err(Error::EndpointOutOfRange { u: 0, v: 3, n: 3 })
        ));
        assert_eq!(Graph::new(0, []), Err(Error::EmptyGraph));
    }

    #[test]
    fn duplicates_collapse() {
        let g = Graph::new(3, [(0, 1), (1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }

    #[test]
    fn laplacian_small_cases() {
        let p2 = Graph::new(2, [(0, 1)]).unwrap().laplacian();
        assert_eq!(p2.to_dense_i64(), vec![vec![1, -1], vec![-1, 1]]);

        let k3 = complete(3).laplacian().to_dense_i64();
        for (i, row) in k3.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, if i == j { 2 } else { -1 });
            }
        }

        let empty3 = empty(3).laplacian();
        assert!(empty3.to_dense_i64().iter().flatten().all(|&x| x == 0));
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let l = g.laplacian();
        for i in 0..5 {
            assert_eq!(l.row_sum(i), 0);
            assert_eq!(l.get(i, i), g.degree(i) as i64);
        }
    }

    #[test]
    fn connectivity() {
        assert!(path(3).is_connected());
        let two_edges = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!two_edges.is_connected());
        assert_eq!(two_edges.components(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn vertex_set_is_canonical() {
        let s = VertexSet::new([3, 1, 3, 2]);
        assert_eq!(s.as_slice(), &[1, 2, 3]);
        assert!(s.contains(2) && !s.contains(0));
    }
}
