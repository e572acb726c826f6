//! Grounded Laplacians: construction, smallest-eigenvalue computation, bound
//! certificates, random graph experiments and consensus with stubborn agents.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds undirected simple graphs, grounded systems and the exact
//!   integer matrices derived from them.
//! * [`combinatorics`] computes edge boundaries and exact cut ratios by
//!   exhaustive enumeration.
//! * [`spectra`] solves the symmetric eigenproblems (inverse iteration,
//!   Lanczos, and a dense Jacobi oracle).
//! * [`bounds`] evaluates the eigenvalue bounds for one grounded system and
//!   emits a [`bounds::BoundCertificate`].
//! * [`random`] samples Erdős–Rényi and random regular graphs.
//! * [`consensus`] simulates continuous and discrete consensus dynamics.
//! * [`experiments`] ties everything together for the command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod combinatorics;
pub mod consensus;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod random;
pub mod spectra;

pub use error::{Error, Result};
pub use graph::{Graph, GroundedSystem, SymMatrix, VertexSet};
pub use spectra::{Normalization, SolverConfig, SpectralPair};
