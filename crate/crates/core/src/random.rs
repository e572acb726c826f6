//! Seeded random graph models and per-instance concentration checks.
//!
//! All randomness comes from [`rand_pcg::Pcg64`] (PCG XSL RR 128/64), seeded
//! through `SeedableRng::seed_from_u64`. Batches derive one child seed per
//! trial with [`child_seed`], so every trial is reproducible on its own and
//! independent of how trials are scheduled across threads.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::Serialize;

use crate::combinatorics::isoperimetric_constant_exact;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::io::sig12;
use crate::spectra::{regular_adjacency_lambda, SolverConfig};

pub type GraphRng = Pcg64;

pub fn rng_from_seed(seed: u64) -> GraphRng {
    Pcg64::seed_from_u64(seed)
}

/// Seed for trial `index` of a batch seeded with `seed`:
/// `splitmix64(seed + (index + 1) · 0x9E3779B97F4A7C15)`.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErParams {
    pub n: usize,
    pub p: f64,
}

impl ErParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "ER graphs need n >= 2, got {n}"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "edge probability {p} outside [0, 1]"
            )));
        }
        Ok(ErParams { n, p })
    }

    pub fn expected_degree(&self) -> f64 {
        self.n as f64 * self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegularParams {
    pub n: usize,
    pub d: usize,
}

impl RegularParams {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d < 3 || d >= n {
            return Err(Error::InvalidInput(format!(
                "need 3 <= d < n, got d = {d}, n = {n}"
            )));
        }
        if !(n * d).is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("n·d = {} must be even", n * d)));
        }
        Ok(RegularParams { n, d })
    }
}

/// Each of the `n(n−1)/2` pairs, in lexicographic order, is kept when a
/// uniform draw from `[0, 1)` falls below `p`.
pub fn sample_er(params: ErParams, seed: u64) -> Graph {
    sample_er_with(params, &mut rng_from_seed(seed))
}

pub fn sample_er_with<R: Rng>(params: ErParams, rng: &mut R) -> Graph {
    let n = params.n;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < params.p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).expect("ER edges are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularMethod {
    /// Exact pairing with full rejection when its expected attempt count fits
    /// the budget, stub pairing otherwise.
    Auto,
    /// Uniform random perfect matching of stubs; any loop or multi-edge
    /// rejects the whole matching. Exactly uniform, but the acceptance
    /// probability decays like `exp(−(d²−1)/4)`.
    ExactRejection,
    /// Pair stubs, keep the valid edges, re-pair the leftovers, restart if
    /// stuck. Approximately uniform; practical for large `d`.
    StubPairing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegularSamplerConfig {
    pub method: RegularMethod,
    pub budget: usize,
}

impl Default for RegularSamplerConfig {
    fn default() -> Self {
        RegularSamplerConfig {
            method: RegularMethod::Auto,
            budget: 10_000,
        }
    }
}

impl RegularSamplerConfig {
    /// Method actually used for `params` once `Auto` is resolved.
    pub fn resolve(&self, params: RegularParams) -> RegularMethod {
        match self.method {
            RegularMethod::Auto => {
                let d = params.d as f64;
                let expected_attempts = ((d * d - 1.0) / 4.0).exp();
                if expected_attempts * 20.0 <= self.budget as f64 {
                    RegularMethod::ExactRejection
                } else {
                    RegularMethod::StubPairing
                }
            }
            m => m,
        }
    }
}

pub fn sample_regular(params: RegularParams, seed: u64) -> Result<Graph> {
    sample_regular_with(
        params,
        &RegularSamplerConfig::default(),
        &mut rng_from_seed(seed),
    )
}

pub fn sample_regular_with<R: Rng>(
    params: RegularParams,
    cfg: &RegularSamplerConfig,
    rng: &mut R,
) -> Result<Graph> {
    let RegularParams { n, d } = params;
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    match cfg.resolve(params) {
        RegularMethod::ExactRejection | RegularMethod::Auto => {
            'attempt: for _ in 0..cfg.budget {
                stubs.shuffle(rng);
                let mut seen = HashSet::with_capacity(stubs.len() / 2);
                for pair in stubs.chunks_exact(2) {
                    let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                    if u == v || !seen.insert((u, v)) {
                        continue 'attempt;
                    }
                }
                return Ok(Graph::new(n, seen).expect("simple pairing"));
            }
        }
        RegularMethod::StubPairing => {
            for _ in 0..cfg.budget {
                if let Some(edges) = stub_pairing_attempt(n, d, rng) {
                    return Ok(Graph::new(n, edges).expect("simple pairing"));
                }
            }
        }
    }
    Err(Error::RejectionBudget {
        attempts: cfg.budget,
    })
}

fn stub_pairing_attempt<R: Rng>(
    n: usize,
    d: usize,
    rng: &mut R,
) -> Option<HashSet<(usize, usize)>> {
    let mut edges: HashSet<(usize, usize)> = HashSet::with_capacity(n * d / 2);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover = vec![0usize; n];
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u != v && !edges.contains(&(u, v)) {
                edges.insert((u, v));
            } else {
                leftover[u] += 1;
                leftover[v] += 1;
            }
        }
        let open: Vec<usize> = (0..n).filter(|&v| leftover[v] > 0).collect();
        let can_progress = open
            .iter()
            .enumerate()
            .any(|(i, &u)| open[i + 1..].iter().any(|&v| !edges.contains(&(u, v))));
        if !open.is_empty() && !can_progress {
            return None;
        }
        stubs = open
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, leftover[v]))
            .collect();
    }
    Some(edges)
}

/// `k` distinct vertices drawn uniformly from `0..n`.
pub fn random_grounded_set<R: Rng>(n: usize, k: usize, rng: &mut R) -> VertexSet {
    rand::seq::index::sample(rng, n, k).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Er(ErParams),
    Regular(RegularParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub isoperimetric_cap: usize,
    /// The `ε` in `λ'(G) <= 2·sqrt(d−1) + ε`.
    pub adjacency_slack: f64,
    pub solver: SolverConfig,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            isoperimetric_cap: crate::combinatorics::DEFAULT_ENUMERATION_CAP,
            adjacency_slack: 1.0,
            solver: SolverConfig::default(),
        }
    }
}

/// Fields that do not apply to the sampled model are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub d_min: usize,
    pub d_max: usize,
    #[serde(with = "sig12")]
    pub epsilon: f64,
    /// `ln n / (np)`; the degree bound assumes it is below one.
    #[serde(with = "sig12::option")]
    pub log_ratio: Option<f64>,
    pub precondition_ok: Option<bool>,
    /// `np·(1 + sqrt(3)·(ln n / np)^(1/2 − ε))`.
    #[serde(with = "sig12::option")]
    pub degree_ub: Option<f64>,
    pub degree_ub_holds: Option<bool>,
    /// Empirical `i(G) / (np)` when the isoperimetric constant is computed.
    #[serde(with = "sig12::option")]
    pub alpha_hat: Option<f64>,
    pub boundary_s: usize,
    /// `|S|(n − |S|)p`, the Binomial mean of `|∂S|`.
    #[serde(with = "sig12::option")]
    pub boundary_mean: Option<f64>,
    #[serde(with = "sig12::option")]
    pub boundary_ratio: Option<f64>,
    /// `max(|λ'_1(A)|, |λ'_{n−1}(A)|)` for regular graphs.
    #[serde(with = "sig12::option")]
    pub adjacency_lambda: Option<f64>,
    #[serde(with = "sig12::option")]
    pub adjacency_bound: Option<f64>,
    pub adjacency_ok: Option<bool>,
}

/// Degree bound `np·(1 + sqrt(3)·(ln n / np)^(1/2 − ε))`, `None` when `np = 0`.
pub fn er_degree_upper_bound(n: usize, p: f64, epsilon: f64) -> Option<f64> {
    let np = n as f64 * p;
    (np > 0.0).then(|| np * (1.0 + 3f64.sqrt() * ((n as f64).ln() / np).powf(0.5 - epsilon)))
}

pub fn concentration_report(
    g: &Graph,
    model: &Model,
    grounded: &VertexSet,
    epsilon: f64,
    opts: &ReportOptions,
) -> Result<ConcentrationReport> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "epsilon {epsilon} outside (0, 1/2]"
        )));
    }
    let n = g.n();
    let boundary_s = crate::combinatorics::edge_boundary(g, grounded);
    let mut report = ConcentrationReport {
        d_min: g.min_degree(),
        d_max: g.max_degree(),
        epsilon,
        log_ratio: None,
        precondition_ok: None,
        degree_ub: None,
        degree_ub_holds: None,
        alpha_hat: None,
        boundary_s,
        boundary_mean: None,
        boundary_ratio: None,
        adjacency_lambda: None,
        adjacency_bound: None,
        adjacency_ok: None,
    };
    match *model {
        Model::Er(ErParams { p, .. }) => {
            let np = n as f64 * p;
            if np > 0.0 {
                let ratio = (n as f64).ln() / np;
                report.log_ratio = Some(ratio);
                report.precondition_ok = Some(ratio < 1.0);
            } else {
                report.precondition_ok = Some(false);
            }
            report.degree_ub = er_degree_upper_bound(n, p, epsilon);
            report.degree_ub_holds = report.degree_ub.map(|ub| report.d_max as f64 <= ub);
            if np > 0.0 && n >= 2 && n <= opts.isoperimetric_cap {
                let iso = isoperimetric_constant_exact(g, opts.isoperimetric_cap)?;
                report.alpha_hat = Some(*iso.value.numer() as f64 / *iso.value.denom() as f64 / np);
            }
            let s = grounded.len();
            let mean = (s * (n - s)) as f64 * p;
            report.boundary_mean = Some(mean);
            report.boundary_ratio = (mean > 0.0).then(|| boundary_s as f64 / mean);
        }
        Model::Regular(RegularParams { d, .. }) => {
            let lam = regular_adjacency_lambda(&g.laplacian(), d, &opts.solver)?;
            let bound = 2.0 * ((d - 1) as f64).sqrt() + opts.adjacency_slack;
            report.adjacency_lambda = Some(lam);
            report.adjacency_bound = Some(bound);
            report.adjacency_ok = Some(lam <= bound);
        }
    }
    Ok(report)
}
