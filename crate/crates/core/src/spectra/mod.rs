//! Symmetric eigenvalue computations.
//!
//! * [`smallest_grounded_eigenpair`]: inverse iteration with zero (or a
//!   user-supplied) shift, inner solves by dense Cholesky or preconditioned CG.
//! * [`algebraic_connectivity`]: restarted Lanczos on the complement of the
//!   all-ones vector.
//! * [`dense_spectrum_oracle`]: full cyclic Jacobi decomposition, used as an
//!   independent check on the two iterative routes.
//!
//! Residuals are always reported scale-free, as `‖Mx − λx‖₂ / ‖x‖₂`, so they do
//! not depend on which normalisation the eigenvector carries.

mod inverse;
mod jacobi;
mod lanczos;
mod linsolve;
mod vecops;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SymMatrix;

pub use inverse::smallest_grounded_eigenpair;
pub use jacobi::{dense_spectrum_oracle, DEFAULT_DENSE_CAP};
pub use lanczos::{algebraic_connectivity, largest_eigenpair};
pub use linsolve::{solve_spd, DIRECT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Largest component equals one (`‖x‖∞ = 1`, sign fixed positive).
    InfNormOne,
    TwoNormOne,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralPair {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub normalization: Normalization,
}

impl SpectralPair {
    pub fn x_min(&self) -> f64 {
        self.eigenvector
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn x_max(&self) -> f64 {
        self.eigenvector
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same pair with the eigenvector rescaled to `target`.
    pub fn renormalized(&self, target: Normalization) -> SpectralPair {
        let mut out = self.clone();
        let s = match target {
            Normalization::TwoNormOne => vecops::norm(&out.eigenvector),
            Normalization::InfNormOne => {
                let (idx, _) = out
                    .eigenvector
                    .iter()
                    .enumerate()
                    .fold(
                        (0, 0.0),
                        |acc, (i, &v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc },
                    );
                out.eigenvector[idx]
            }
        };
        if s != 0.0 {
            vecops::scale(&mut out.eigenvector, 1.0 / s);
        }
        out.normalization = target;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Residual threshold `‖Mx − λx‖₂` for a unit vector.
    pub tolerance: f64,
    /// Outer iterations (inverse iteration steps or Lanczos restarts).
    pub max_iterations: usize,
    /// Seed for random start vectors.
    pub seed: u64,
    /// Optional spectral shift for inverse iteration; must stay below the
    /// smallest eigenvalue.
    pub shift: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-10,
            max_iterations: 500,
            seed: 0,
            shift: None,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput(
                "solver tolerance must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Scale-free residual `‖Mx − λx‖₂ / ‖x‖₂`.
pub fn residual(m: &SymMatrix, eigenvalue: f64, x: &[f64]) -> f64 {
    let mut r = m.mul_vec(x);
    vecops::axpy(&mut r, -eigenvalue, x);
    let xn = vecops::norm(x);
    if xn == 0.0 {
        f64::INFINITY
    } else {
        vecops::norm(&r) / xn
    }
}

/// Rayleigh quotient `xᵀMx / xᵀx`.
pub fn rayleigh_quotient(m: &SymMatrix, x: &[f64]) -> f64 {
    m.quadratic_form(x) / vecops::dot(x, x)
}

/// Largest adjacency eigenvalue magnitude away from the trivial eigenvalue,
/// `max(|λ'_1(A)|, |λ'_{n-1}(A)|)`, for a `d`-regular graph.
///
/// With `L = dI − A` this is `max(d − λ₂(L), λ_max(L) − d)`.
pub fn regular_adjacency_lambda(
    laplacian: &SymMatrix,
    d: usize,
    cfg: &SolverConfig,
) -> Result<f64> {
    let l2 = algebraic_connectivity(laplacian, cfg)?.eigenvalue;
    let lmax = largest_eigenpair(laplacian, true, cfg)?.eigenvalue;
    let d = d as f64;
    Ok((d - l2).abs().max((lmax - d).abs()))
}
