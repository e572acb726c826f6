//! Python bindings for `groundlap`.
//!
//! Graphs and grounded systems are exposed as classes; solvers, samplers and
//! simulations as functions. Reports are returned as JSON strings so Python
//! callers see exactly what the command-line tool writes.

use groundlap::combinatorics::{
    isoperimetric_constant_exact, min_cut_ratio_exact, ExactRatio, DEFAULT_ENUMERATION_CAP,
};
use groundlap::consensus::Mode;
use groundlap::experiments::{self, ConsensusOptions, RunOptions};
use groundlap::random::{self, ErParams, RegularParams};
use groundlap::spectra::smallest_grounded_eigenpair;
use groundlap::{Error, SolverConfig, VertexSet};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::NotConverged { .. } => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// `(numerator, denominator, vertices)` of an exact ratio.
fn ratio_tuple(r: ExactRatio) -> (u64, u64, Vec<usize>) {
    (
        *r.value.numer(),
        *r.value.denom(),
        r.set.as_slice().to_vec(),
    )
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "continuous" => Ok(Mode::Continuous),
        "discrete" => Ok(Mode::Discrete),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'continuous' or 'discrete', got {other:?}"
        ))),
    }
}

/// Simple undirected graph on vertices `0..n`.
#[pyclass(name = "Graph", module = "pygroundlap", frozen)]
pub struct PyGraph {
    inner: groundlap::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        groundlap::Graph::new(n, edges)
            .map(|inner| PyGraph { inner })
            .map_err(to_py)
    }

    /// Two `n/2`-cliques joined by a single edge.
    #[staticmethod]
    fn dumbbell(n: usize) -> PyResult<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(PyValueError::new_err("dumbbell needs an even n >= 4"));
        }
        Ok(PyGraph {
            inner: groundlap::graph::dumbbell(n),
        })
    }

    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(to_py(Error::EmptyGraph));
        }
        Ok(PyGraph {
            inner: groundlap::graph::complete(n),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Dense Laplacian as a list of rows.
    fn laplacian(&self) -> Vec<Vec<i64>> {
        self.inner.laplacian().to_dense_i64()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, edges={})",
            self.inner.n(),
            self.inner.edge_count()
        )
    }
}

/// A graph together with its grounded vertex set.
#[pyclass(name = "GroundedSystem", module = "pygroundlap", frozen)]
pub struct PyGroundedSystem {
    inner: groundlap::GroundedSystem,
}

#[pymethods]
impl PyGroundedSystem {
    #[new]
    fn new(graph: &PyGraph, grounded: Vec<usize>) -> PyResult<Self> {
        groundlap::GroundedSystem::new(graph.inner.clone(), VertexSet::new(grounded))
            .map(|inner| PyGroundedSystem { inner })
            .map_err(to_py)
    }

    #[getter]
    fn grounded(&self) -> Vec<usize> {
        self.inner.grounded().as_slice().to_vec()
    }

    #[getter]
    fn floating(&self) -> Vec<usize> {
        self.inner.floating().to_vec()
    }

    /// Number of grounded neighbours of each floating vertex.
    fn alpha(&self) -> Vec<usize> {
        self.inner.alpha().to_vec()
    }

    fn boundary_size(&self) -> usize {
        self.inner.boundary_size()
    }

    /// Dense grounded Laplacian, rows and columns in floating-vertex order.
    fn grounded_laplacian(&self) -> Vec<Vec<i64>> {
        self.inner.grounded_laplacian().to_dense_i64()
    }

    /// Smallest eigenvalue and its nonnegative eigenvector scaled to `max = 1`.
    #[pyo3(signature = (tol = 1e-10, seed = 0))]
    fn smallest_eigenpair(&self, tol: f64, seed: u64) -> PyResult<(f64, Vec<f64>)> {
        let cfg = SolverConfig::default().with_tolerance(tol).with_seed(seed);
        let pair =
            smallest_grounded_eigenpair(&self.inner.grounded_laplacian(), &cfg).map_err(to_py)?;
        Ok((pair.eigenvalue, pair.eigenvector))
    }

    /// Minimum of `|∂X|/|X|` over nonempty floating sets, by enumeration.
    #[pyo3(signature = (cap = DEFAULT_ENUMERATION_CAP))]
    fn min_cut_ratio(&self, cap: usize) -> PyResult<(u64, u64, Vec<usize>)> {
        min_cut_ratio_exact(&self.inner, cap)
            .map(ratio_tuple)
            .map_err(to_py)
    }

    /// Bound certificate as JSON.
    #[pyo3(signature = (tol = 1e-8, solver_tol = 1e-10, seed = 0))]
    fn certificate(&self, tol: f64, solver_tol: f64, seed: u64) -> PyResult<String> {
        let opts = RunOptions {
            check_tolerance: tol,
            solver_tolerance: solver_tol,
            ..RunOptions::new(seed)
        };
        experiments::analyze(
            self.inner.graph().clone(),
            self.inner.grounded().clone(),
            &opts,
        )
        .map(|c| c.to_json())
        .map_err(to_py)
    }

    /// Steady state of the floating agents for the given stubborn values.
    fn equilibrium(&self, stubborn_values: Vec<f64>) -> PyResult<Vec<f64>> {
        groundlap::consensus::equilibrium(&self.inner, &stubborn_values).map_err(to_py)
    }

    /// Consensus simulation; returns the summary JSON and the `(time, error)` trace.
    #[pyo3(signature = (stubborn_values, mode = "continuous", seed = 0, horizon = None, gain = None, dt = None, initial = None))]
    #[allow(clippy::too_many_arguments)]
    fn simulate(
        &self,
        stubborn_values: Vec<f64>,
        mode: &str,
        seed: u64,
        horizon: Option<f64>,
        gain: Option<f64>,
        dt: Option<f64>,
        initial: Option<Vec<f64>>,
    ) -> PyResult<(String, Vec<(f64, f64)>)> {
        let copts = ConsensusOptions {
            horizon,
            gain,
            dt,
            initial,
            ..ConsensusOptions::new(parse_mode(mode)?)
        };
        let run = experiments::consensus_run(
            self.inner.graph().clone(),
            self.inner.grounded().clone(),
            stubborn_values,
            &copts,
            &RunOptions::new(seed),
        )
        .map_err(to_py)?;
        Ok((experiments::to_json(&run.report), run.trace.samples))
    }

    fn __repr__(&self) -> String {
        format!(
            "GroundedSystem(n={}, grounded={:?})",
            self.inner.graph().n(),
            self.inner.grounded().as_slice()
        )
    }
}

/// Isoperimetric constant `min |∂A|/|A|` over `|A| <= n/2`.
#[pyfunction]
#[pyo3(signature = (graph, cap = DEFAULT_ENUMERATION_CAP))]
fn isoperimetric_constant(graph: &PyGraph, cap: usize) -> PyResult<(u64, u64, Vec<usize>)> {
    isoperimetric_constant_exact(&graph.inner, cap)
        .map(ratio_tuple)
        .map_err(to_py)
}

#[pyfunction]
fn sample_er(n: usize, p: f64, seed: u64) -> PyResult<PyGraph> {
    let params = ErParams::new(n, p).map_err(to_py)?;
    Ok(PyGraph {
        inner: random::sample_er(params, seed),
    })
}

#[pyfunction]
fn sample_regular(n: usize, d: usize, seed: u64) -> PyResult<PyGraph> {
    let params = RegularParams::new(n, d).map_err(to_py)?;
    random::sample_regular(params, seed)
        .map(|inner| PyGraph { inner })
        .map_err(to_py)
}

#[pymodule]
fn pygroundlap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyGroundedSystem>()?;
    m.add_function(wrap_pyfunction!(isoperimetric_constant, m)?)?;
    m.add_function(wrap_pyfunction!(sample_er, m)?)?;
    m.add_function(wrap_pyfunction!(sample_regular, m)?)?;
    Ok(())
}
