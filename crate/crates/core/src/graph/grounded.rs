use super::{Graph, SymMatrix, VertexSet};
use crate::error::{Error, Result};

/// A graph together with a nonempty proper set of grounded vertices.
///
/// Floating (non-grounded) vertices are indexed in ascending vertex id. Every
/// matrix and vector derived from the system uses that order, so component
/// `i` of an eigenvector belongs to vertex `floating()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundedSystem {
    graph: Graph,
    grounded: VertexSet,
    floating: Vec<usize>,
    position: Vec<Option<usize>>,
    alpha: Vec<usize>,
}

impl GroundedSystem {
    pub fn new(graph: Graph, grounded: impl Into<VertexSet>) -> Result<Self> {
        let grounded = grounded.into();
        let n = graph.n();
        if grounded.is_empty() {
            return Err(Error::InvalidGroundedSet("grounded set is empty".into()));
        }
        if let Some(v) = grounded.iter().find(|&v| v >= n) {
            return Err(Error::InvalidGroundedSet(format!(
                "vertex {v} is outside 0..{n}"
            )));
        }
        if grounded.len() >= n {
            return Err(Error::InvalidGroundedSet(
                "grounded set must leave at least one floating vertex".into(),
            ));
        }
        let mask = grounded.mask(n);
        let floating: Vec<usize> = (0..n).filter(|&v| !mask[v]).collect();
        let mut position = vec![None; n];
        for (i, &v) in floating.iter().enumerate() {
            position[v] = Some(i);
        }
        let alpha = floating
            .iter()
            .map(|&v| graph.neighbors(v).iter().filter(|&&w| mask[w]).count())
            .collect();
        Ok(GroundedSystem {
            graph,
            grounded,
            floating,
            position,
            alpha,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn grounded(&self) -> &VertexSet {
        &self.grounded
    }

    /// Floating vertices in ascending id order.
    pub fn floating(&self) -> &[usize] {
        &self.floating
    }

    pub fn floating_count(&self) -> usize {
        self.floating.len()
    }

    /// Index of vertex `v` in the floating order, if it is floating.
    pub fn floating_index(&self, v: usize) -> Option<usize> {
        self.position[v]
    }

    /// Number of grounded neighbours of each floating vertex.
    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    /// `|∂S|`, the number of edges between grounded and floating vertices.
    pub fn boundary_size(&self) -> usize {
        self.alpha.iter().sum()
    }

    /// Every grounded vertex is adjacent to every floating vertex.
    pub fn is_fully_grounded(&self) -> bool {
        self.alpha.iter().all(|&a| a == self.grounded.len())
    }

    /// Principal submatrix of the Laplacian on the floating vertices.
    pub fn grounded_laplacian(&self) -> SymMatrix {
        let mut triplets = Vec::new();
        for (i, &v) in self.floating.iter().enumerate() {
            triplets.push((i, i, self.graph.degree(v) as i64));
            for &w in self.graph.neighbors(v) {
                if let Some(j) = self.position[w] {
                    if i < j {
                        triplets.push((i, j, -1));
                    }
                }
            }
        }
        SymMatrix::from_upper_triplets(self.floating.len(), triplets)
            .expect("grounded laplacian triplets are in range")
    }

    /// Splits the grounded Laplacian as `L̄ + Δ`: the Laplacian of the
    /// floating subgraph and the diagonal of grounded-neighbour counts.
    pub fn decompose(&self) -> (SymMatrix, SymMatrix) {
        let lbar = self.floating_subgraph().laplacian();
        let delta =
            SymMatrix::diagonal_matrix(&self.alpha.iter().map(|&a| a as i64).collect::<Vec<_>>());
        (lbar, delta)
    }

    /// Subgraph induced on the floating vertices, relabelled by floating index.
    pub fn floating_subgraph(&self) -> Graph {
        self.graph.induced(&self.floating)
    }

    pub fn connected_floating(&self) -> bool {
        self.floating_subgraph().is_connected()
    }

    /// Floating-to-grounded adjacency: for each floating index, the indices
    /// into `grounded()` of its grounded neighbours.
    pub fn stubborn_links(&self) -> Vec<Vec<usize>> {
        let grounded = self.grounded.as_slice();
        self.floating
            .iter()
            .map(|&v| {
                self.graph
                    .neighbors(v)
                    .iter()
                    .filter_map(|w| grounded.binary_search(w).ok())
                    .collect()
            })
            .collect()
    }

    /// Scatters a floating-indexed vector back onto all `n` vertices, filling
    /// grounded positions with `fill`.
    pub fn lift(&self, floating_values: &[f64], fill: f64) -> Vec<f64> {
        let mut out = vec![fill; self.graph.n()];
        for (i, &v) in self.floating.iter().enumerate() {
            out[v] = floating_values[i];
        }
        out
    }
}
