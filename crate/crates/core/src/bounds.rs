//! Bounds on the smallest grounded eigenvalue, evaluated for one system.
//!
//! For a connected graph with grounded set `S`, `m = n − |S|` floating
//! vertices and Perron vector `x` scaled to `max x = 1`:
//!
//! ```text
//! |∂S|·x_min / m  <=  λ  <=  min_{X ⊆ V∖S} |∂X|/|X|  <=  |∂S| / m
//! x_min >= 1 − 2·sqrt(|S|·|∂S|) / λ₂(L̄)        (floating subgraph connected)
//! λ₂(L) >= i(G)² / (2·d_max)
//! λ <= |S|, with equality iff every grounded vertex sees every floating one
//! ```
//!
//! [`certify_bounds`] evaluates all of these and records a pass/fail
//! flag with its slack for each.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::combinatorics::{
    cut_ratio, isoperimetric_constant_exact, min_cut_ratio_exact, ExactRatio,
    DEFAULT_ENUMERATION_CAP,
};
use crate::error::{Error, Result};
use crate::graph::{GroundedSystem, VertexSet};
use crate::io::sig12;
use crate::spectra::{algebraic_connectivity, Normalization, SolverConfig, SpectralPair};

pub const SCHEMA_VERSION: &str = "cert_v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutMode {
    /// Exhaustive minimum over all floating subsets (size-capped).
    Exact,
    /// Minimum over the given family plus `X = V∖S`.
    Candidates(Vec<VertexSet>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutProvenance {
    Exact,
    Candidates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `2·sqrt(|S||∂S|)/λ₂(L̄) < 1`: λ is within a constant factor of `|∂S|/m`.
    #[serde(rename = "theta")]
    Theta,
    /// The ratio is at most the configured epsilon: `λ ≈ |∂S|/m`.
    #[serde(rename = "one-minus-o1")]
    OneMinusO1,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateOptions {
    /// Slack allowed on every inequality check.
    pub check_tolerance: f64,
    pub solver: SolverConfig,
    pub cut_cap: usize,
    pub isoperimetric_cap: usize,
    pub regime_epsilon: f64,
    /// Compute `λ₂(L̄)` and `λ₂(L)`; turning this off skips the `x_min`
    /// and Cheeger checks.
    pub compute_lambda2: bool,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            check_tolerance: 1e-8,
            solver: SolverConfig::default(),
            cut_cap: DEFAULT_ENUMERATION_CAP,
            isoperimetric_cap: DEFAULT_ENUMERATION_CAP,
            regime_epsilon: 0.1,
            compute_lambda2: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundFlag {
    pub name: &'static str,
    pub pass: bool,
    /// `rhs − lhs` of the inequality; negative means violated.
    #[serde(with = "sig12")]
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub schema: &'static str,
    pub n: usize,
    pub grounded: VertexSet,
    pub floating_count: usize,
    pub boundary_size: usize,
    #[serde(with = "sig12")]
    pub lambda: f64,
    #[serde(with = "sig12")]
    pub x_min: f64,
    #[serde(with = "sig12")]
    pub x_max: f64,
    #[serde(with = "sig12")]
    pub residual: f64,
    #[serde(with = "sig12")]
    pub lower_bound: f64,
    #[serde(with = "sig12")]
    pub upper_full: f64,
    #[serde(with = "sig12")]
    pub upper_cut: f64,
    #[serde(serialize_with = "ratio_string")]
    pub upper_cut_ratio: Ratio<u64>,
    pub upper_cut_provenance: CutProvenance,
    pub upper_cut_set: VertexSet,
    #[serde(with = "sig12::option")]
    pub xmin_lb: Option<f64>,
    pub xmin_lb_vacuous: Option<bool>,
    #[serde(with = "sig12::option")]
    pub lambda2_lbar: Option<f64>,
    #[serde(with = "sig12::option")]
    pub lambda2_l: Option<f64>,
    #[serde(serialize_with = "opt_ratio_string")]
    pub isoperimetric: Option<Ratio<u64>>,
    #[serde(with = "sig12::option")]
    pub cheeger_lb_lambda2: Option<f64>,
    #[serde(with = "sig12::option")]
    pub tightness_ratio: Option<f64>,
    pub regime: Regime,
    /// The lower bound and `upper_full` coincide within tolerance.
    pub tight: bool,
    pub flags: Vec<BoundFlag>,
    #[serde(with = "sig12")]
    pub tolerance: f64,
    #[serde(with = "sig12")]
    pub solver_tolerance: f64,
    pub seed: u64,
}

impl BoundCertificate {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }

    pub fn flag(&self, name: &str) -> Option<&BoundFlag> {
        self.flags.iter().find(|f| f.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }
}

fn ratio_string<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn opt_ratio_string<S: Serializer>(r: &Option<Ratio<u64>>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => ratio_string(r, s),
        None => s.serialize_none(),
    }
}

fn ratio_f64(r: &Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Lower bound on `x_min` together with whether it is vacuous (negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XminBound {
    pub value: f64,
    pub vacuous: bool,
}

/// `1 − 2·sqrt(|S|·|∂S|) / λ₂(L̄)`.
pub fn xmin_lower_bound(sys: &GroundedSystem, lambda2_lbar: f64) -> Result<XminBound> {
    if !sys.connected_floating() {
        return Err(Error::Disconnected(
            "floating subgraph is disconnected (grounded set is a vertex cut)".into(),
        ));
    }
    if !(lambda2_lbar > 0.0) {
        return Err(Error::InvalidInput(format!(
            "λ₂(L̄) must be positive, got {lambda2_lbar}"
        )));
    }
    let value = 1.0 - tightness_ratio(sys.grounded().len(), sys.boundary_size(), lambda2_lbar);
    Ok(XminBound {
        value,
        vacuous: value < 0.0,
    })
}

/// `i² / (2·d_max)`, zero for an edgeless graph.
pub fn cheeger_lower_bound(iso: Ratio<u64>, d_max: usize) -> f64 {
    if d_max == 0 {
        return 0.0;
    }
    let i = ratio_f64(&iso);
    i * i / (2.0 * d_max as f64)
}

/// `2·sqrt(|S|·|∂S|) / λ₂(L̄)`.
pub fn tightness_ratio(grounded: usize, boundary: usize, lambda2_lbar: f64) -> f64 {
    2.0 * ((grounded * boundary) as f64).sqrt() / lambda2_lbar
}

/// Regime tag for a tightness ratio. These are finite-n proxies: the
/// asymptotic statements concern sequences of graphs, and the tag only says
/// which hypothesis this instance satisfies numerically.
pub fn regime_for_ratio(ratio: f64, epsilon: f64) -> Regime {
    if ratio <= epsilon {
        Regime::OneMinusO1
    } else if ratio < 1.0 {
        Regime::Theta
    } else {
        Regime::Inconclusive
    }
}

pub fn classify_regime(
    sys: &GroundedSystem,
    lambda2_lbar: f64,
    epsilon: f64,
) -> Result<(f64, Regime)> {
    xmin_lower_bound(sys, lambda2_lbar)?;
    let ratio = tightness_ratio(sys.grounded().len(), sys.boundary_size(), lambda2_lbar);
    Ok((ratio, regime_for_ratio(ratio, epsilon)))
}

/// Minimum cut ratio over a candidate family plus `X = V∖S`.
pub fn min_cut_ratio_candidates(sys: &GroundedSystem, family: &[VertexSet]) -> Result<ExactRatio> {
    let floating = VertexSet::from(sys.floating());
    let mut best = ExactRatio {
        value: Ratio::new(sys.boundary_size() as u64, sys.floating_count() as u64),
        set: floating,
    };
    for set in family {
        if let Some(v) = set
            .iter()
            .find(|&v| v >= sys.graph().n() || sys.floating_index(v).is_none())
        {
            return Err(Error::InvalidInput(format!(
                "candidate set contains non-floating vertex {v}"
            )));
        }
        let Some(r) = cut_ratio(sys.graph(), set) else {
            continue;
        };
        if r < best.value || (r == best.value && *set < best.set) {
            best = ExactRatio {
                value: r,
                set: set.clone(),
            };
        }
    }
    Ok(best)
}

/// Best cut ratio among the nested sets of floating vertices with the `k`
/// largest entries of `x` (ties broken by vertex id), for `k = 1..m`.
///
/// Useful as a candidate family when exhaustive enumeration is out of reach:
/// for a Perron vector the far side of a bottleneck carries the largest entries.
pub fn sweep_cut(sys: &GroundedSystem, x: &[f64]) -> Result<ExactRatio> {
    let m = sys.floating_count();
    if x.len() != m {
        return Err(Error::InvalidInput(format!(
            "sweep vector has length {} but there are {m} floating vertices",
            x.len()
        )));
    }
    let g = sys.graph();
    let floating = sys.floating();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut inside = vec![false; g.n()];
    let mut boundary: i64 = 0;
    let mut best: Option<(Ratio<u64>, usize)> = None;
    for (k, &i) in order.iter().enumerate() {
        let v = floating[i];
        let internal = g.neighbors(v).iter().filter(|&&w| inside[w]).count() as i64;
        boundary += g.degree(v) as i64 - 2 * internal;
        inside[v] = true;
        let r = Ratio::new(boundary as u64, (k + 1) as u64);
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, k + 1));
        }
    }
    let (value, size) = best.expect("at least one floating vertex");
    Ok(ExactRatio {
        value,
        set: order[..size].iter().map(|&i| floating[i]).collect(),
    })
}

/// Evaluates every bound for `sys` given its solved smallest eigenpair.
pub fn certify_bounds(
    sys: &GroundedSystem,
    pair: &SpectralPair,
    cut_mode: &CutMode,
    opts: &CertificateOptions,
) -> Result<BoundCertificate> {
    let g = sys.graph();
    if !g.is_connected() {
        return Err(Error::Disconnected(
            "certificate needs a connected graph".into(),
        ));
    }
    if pair.eigenvector.len() != sys.floating_count() {
        return Err(Error::InvalidInput(format!(
            "eigenvector has length {} but there are {} floating vertices",
            pair.eigenvector.len(),
            sys.floating_count()
        )));
    }
    let pair = if pair.normalization == Normalization::InfNormOne {
        pair.clone()
    } else {
        pair.renormalized(Normalization::InfNormOne)
    };
    let tol = opts.check_tolerance;
    let s = sys.grounded().len();
    let m = sys.floating_count();
    let b = sys.boundary_size();
    let lambda = pair.eigenvalue;
    let x_min = pair.x_min();
    let x_max = pair.x_max();
    let lower_bound = b as f64 * x_min / m as f64;
    let upper_full = b as f64 / m as f64;

    let (cut, provenance) = match cut_mode {
        CutMode::Exact => (
            min_cut_ratio_exact(sys, opts.cut_cap)?,
            CutProvenance::Exact,
        ),
        CutMode::Candidates(family) => (
            min_cut_ratio_candidates(sys, family)?,
            CutProvenance::Candidates,
        ),
    };
    let upper_cut = cut.to_f64();

    let lambda2_lbar = if opts.compute_lambda2 && m >= 2 {
        let (lbar, _) = sys.decompose();
        Some(algebraic_connectivity(&lbar, &opts.solver)?.eigenvalue)
    } else {
        None
    };
    let floating_connected = sys.connected_floating();
    let xmin_lb = match lambda2_lbar {
        Some(l2) if floating_connected && l2 > 0.0 => Some(xmin_lower_bound(sys, l2)?),
        _ => None,
    };
    let ratio = match lambda2_lbar {
        Some(l2) if floating_connected && l2 > 0.0 => Some(tightness_ratio(s, b, l2)),
        _ => None,
    };
    let regime = ratio.map_or(Regime::Inconclusive, |r| {
        regime_for_ratio(r, opts.regime_epsilon)
    });

    let (isoperimetric, lambda2_l) =
        if opts.compute_lambda2 && g.n() <= opts.isoperimetric_cap && g.n() >= 2 {
            let iso = isoperimetric_constant_exact(g, opts.isoperimetric_cap)?;
            let l2 = algebraic_connectivity(&g.laplacian(), &opts.solver)?.eigenvalue;
            (Some(iso.value), Some(l2))
        } else {
            (None, None)
        };
    let cheeger = isoperimetric.map(|i| cheeger_lower_bound(i, g.max_degree()));

    let mut flags = Vec::new();
    let le = |name: &'static str, lhs: f64, rhs: f64| BoundFlag {
        name,
        pass: lhs <= rhs + tol,
        slack: rhs - lhs,
    };
    flags.push(le("lower_le_lambda", lower_bound, lambda));
    flags.push(le("lambda_le_upper_cut", lambda, upper_cut));
    flags.push(le("upper_cut_le_upper_full", upper_cut, upper_full));
    flags.push(le("lambda_le_grounded_count", lambda, s as f64));
    if sys.is_fully_grounded() {
        let gap = (lambda - s as f64).abs();
        flags.push(BoundFlag {
            name: "lambda_eq_grounded_count",
            pass: gap <= tol,
            slack: tol - gap,
        });
    } else {
        flags.push(BoundFlag {
            name: "lambda_lt_grounded_count",
            pass: lambda < s as f64 - tol,
            slack: s as f64 - lambda,
        });
    }
    if let Some(lb) = xmin_lb {
        flags.push(le("xmin_lower_bound", lb.value, x_min));
    }
    if let (Some(cb), Some(l2)) = (cheeger, lambda2_l) {
        flags.push(le("cheeger_lambda2", cb, l2));
    }

    Ok(BoundCertificate {
        schema: SCHEMA_VERSION,
        n: g.n(),
        grounded: sys.grounded().clone(),
        floating_count: m,
        boundary_size: b,
        lambda,
        x_min,
        x_max,
        residual: pair.residual,
        lower_bound,
        upper_full,
        upper_cut,
        upper_cut_ratio: cut.value,
        upper_cut_provenance: provenance,
        upper_cut_set: cut.set,
        xmin_lb: xmin_lb.map(|l| l.value),
        xmin_lb_vacuous: xmin_lb.map(|l| l.vacuous),
        lambda2_lbar,
        lambda2_l,
        isoperimetric,
        cheeger_lb_lambda2: cheeger,
        tightness_ratio: ratio,
        regime,
        tight: (upper_full - lower_bound).abs() <= tol,
        flags,
        tolerance: tol,
        solver_tolerance: opts.solver.tolerance,
        seed: opts.solver.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, dumbbell, path};
    use crate::spectra::smallest_grounded_eigenpair;

    fn certify(sys: &GroundedSystem, mode: CutMode) -> BoundCertificate {
        let pair = smallest_grounded_eigenpair(&sys.grounded_laplacian(), &SolverConfig::default())
            .unwrap();
        certify_bounds(sys, &pair, &mode, &CertificateOptions::default()).unwrap()
    }

    #[test]
    fn sweep_finds_dumbbell_bottleneck() {
        let sys = GroundedSystem::new(dumbbell(20), [19]).unwrap();
        let pair = smallest_grounded_eigenpair(&sys.grounded_laplacian(), &SolverConfig::default())
            .unwrap();
        let cut = sweep_cut(&sys, &pair.eigenvector).unwrap();
        assert_eq!(cut.value, Ratio::new(1, 10));
        assert_eq!(cut.set.as_slice(), &(0..10).collect::<Vec<_>>()[..]);
        assert!(sweep_cut(&sys, &[1.0]).is_err());
    }

    #[test]
    fn path_sandwich() {
        let sys = GroundedSystem::new(path(3), [2]).unwrap();
        let c = certify(&sys, CutMode::Exact);
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((c.lower_bound - golden / 2.0).abs() < 1e-9);
        assert!((c.lambda - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(c.upper_cut_ratio, Ratio::new(1, 2));
        assert_eq!(c.upper_cut_set.as_slice(), &[0, 1]);
        assert_eq!(c.upper_full, 0.5);
        assert!(c.all_pass(), "{:#?}", c.flags);
    }

    #[test]
    fn triangle_is_tight() {
        let sys = GroundedSystem::new(complete(3), [2]).unwrap();
        let c = certify(&sys, CutMode::Exact);
        assert!((c.lower_bound - 1.0).abs() < 1e-9);
        assert!((c.lambda - 1.0).abs() < 1e-12);
        assert_eq!(c.upper_full, 1.0);
        assert!(c.tight);
        // vertex 2 sees both floating vertices: the equality case λ = |S|
        assert!(c.flag("lambda_lt_grounded_count").is_none());
        assert!(c.flag("lambda_eq_grounded_count").unwrap().pass);
        // λ₂(L̄) = 2 for a single edge, so the `x_min` bound is vacuous
        let lb = c.xmin_lb.unwrap();
        assert!((lb - (1.0 - 2f64.sqrt())).abs() < 1e-9);
        assert_eq!(c.xmin_lb_vacuous, Some(true));
        assert_eq!(c.regime, Regime::Inconclusive);
        assert!(c.all_pass());
    }

    #[test]
    fn dumbbell_ten() {
        let sys = GroundedSystem::new(dumbbell(10), [9]).unwrap();
        assert_eq!(sys.boundary_size(), 4);
        let c = certify(&sys, CutMode::Exact);
        assert!((c.upper_full - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(c.upper_cut_ratio, Ratio::new(1, 5));
        assert!(c.lambda <= 0.2);
        assert!(c.all_pass());

        let left = VertexSet::new(0..5);
        let cand = certify(&sys, CutMode::Candidates(vec![left.clone()]));
        assert_eq!(cand.upper_cut_provenance, CutProvenance::Candidates);
        assert_eq!(cand.upper_cut_set, left);
    }

    #[test]
    fn xmin_bound_examples() {
        let k3 = GroundedSystem::new(complete(3), [2]).unwrap();
        let lb = xmin_lower_bound(&k3, 2.0).unwrap();
        assert!((lb.value + 0.414_213_562_373_095).abs() < 1e-12);
        assert!(lb.vacuous);

        let k20 = GroundedSystem::new(complete(20), [0]).unwrap();
        let lb = xmin_lower_bound(&k20, 19.0).unwrap();
        assert!((lb.value - (1.0 - 2.0 * 19f64.sqrt() / 19.0)).abs() < 1e-12);
        assert!((lb.value - 0.541).abs() < 1e-3);
        assert!(!lb.vacuous);

        let cut = GroundedSystem::new(path(3), [1]).unwrap();
        assert!(matches!(
            xmin_lower_bound(&cut, 1.0),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn cheeger_examples() {
        assert!((cheeger_lower_bound(Ratio::new(2, 1), 3) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cheeger_lower_bound(Ratio::new(1, 1), 1), 0.5);
        assert_eq!(cheeger_lower_bound(Ratio::new(0, 1), 2), 0.0);
    }

    #[test]
    fn regimes_from_closed_form() {
        // K_n grounded at one vertex: |∂S| = n − 1 and λ₂(L̄) = n − 1
        let ratio = |n: usize| tightness_ratio(1, n - 1, (n - 1) as f64);
        assert!((ratio(100) - 0.201).abs() < 1e-3);
        assert_eq!(regime_for_ratio(ratio(100), 0.1), Regime::Theta);
        assert!((ratio(10_000) - 0.020).abs() < 1e-3);
        assert_eq!(regime_for_ratio(ratio(10_000), 0.1), Regime::OneMinusO1);

        let k3 = GroundedSystem::new(complete(3), [2]).unwrap();
        let (r, regime) = classify_regime(&k3, 2.0, 0.1).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(regime, Regime::Inconclusive);

        let k100 = GroundedSystem::new(complete(100), [0]).unwrap();
        assert_eq!(classify_regime(&k100, 99.0, 0.1).unwrap().1, Regime::Theta);
    }

    #[test]
    fn rejects_disconnected_graph() {
        let g = crate::graph::Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let sys = GroundedSystem::new(g, [0, 2]).unwrap();
        let pair = smallest_grounded_eigenpair(&sys.grounded_laplacian(), &SolverConfig::default())
            .unwrap();
        assert!(matches!(
            certify_bounds(&sys, &pair, &CutMode::Exact, &CertificateOptions::default()),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn json_schema_fields() {
        let sys = GroundedSystem::new(path(3), [2]).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&certify(&sys, CutMode::Exact).to_json()).unwrap();
        assert_eq!(json["schema"], "cert_v1");
        assert_eq!(json["upper_cut_ratio"], "1/2");
        assert_eq!(json["upper_cut_provenance"], "exact");
        assert_eq!(json["lambda"].as_f64().unwrap(), 0.38196601125);
        assert_eq!(json["grounded"], serde_json::json!([2]));
    }
}
