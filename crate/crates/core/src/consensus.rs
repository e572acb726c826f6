//! Consensus dynamics with stubborn agents.
//!
//! Floating agents follow `dY/dt = −L_g·Y + B·y_S` (continuous) or
//! `Y ← Y − (1/k)(L_g·Y − B·y_S)` (discrete), where `B` is the
//! floating-to-stubborn adjacency block. Both converge to the equilibrium
//! `L_g·Y* = B·y_S`, at rate `λ` and per-step factor `1 − λ/k` respectively.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GroundedSystem;
use crate::io::sig12;
use crate::random::rng_from_seed;
use crate::spectra::{smallest_grounded_eigenpair, solve_spd, SolverConfig};

/// Explicit RK4 is stable on the negative real axis up to `|z| ≈ 2.785`.
pub const RK4_STABILITY_LIMIT: f64 = 2.785;
/// Traces keep roughly this many samples regardless of step count.
pub const TARGET_SAMPLES: usize = 2000;
pub const DEFAULT_FIT_WINDOW: f64 = 0.5;
const MIN_FIT_POINTS: usize = 10;
/// Initial conditions with a smaller dominant-mode component are redrawn.
const GENERIC_PROJECTION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone)]
pub struct ConsensusProblem {
    pub sys: GroundedSystem,
    /// One value per grounded vertex, in ascending vertex order.
    pub stubborn_values: Vec<f64>,
    /// One value per floating vertex, in ascending vertex order.
    pub initial: Vec<f64>,
    /// Discrete gain `k`; defaults to `2·d_max`.
    pub gain: f64,
    /// Continuous step size; defaults to `0.1 / d_max`.
    pub dt: f64,
    /// Total time (continuous) or number of steps (discrete).
    pub horizon: f64,
    pub fit_window: f64,
}

impl ConsensusProblem {
    pub fn new(
        sys: GroundedSystem,
        stubborn_values: Vec<f64>,
        initial: Vec<f64>,
        horizon: f64,
    ) -> Result<Self> {
        let d_max = sys.graph().max_degree().max(1) as f64;
        let prob = ConsensusProblem {
            sys,
            stubborn_values,
            initial,
            gain: 2.0 * d_max,
            dt: 0.1 / d_max,
            horizon,
            fit_window: DEFAULT_FIT_WINDOW,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Draws the initial state uniformly from `[min y_S − 1, max y_S + 1]`,
    /// redrawing while its component along the dominant mode of `L_g` is
    /// below `1e-6` (relative to the draw's distance from equilibrium).
    pub fn with_generic_initial(
        sys: GroundedSystem,
        stubborn_values: Vec<f64>,
        horizon: f64,
        seed: u64,
    ) -> Result<Self> {
        check_stubborn(&sys, &stubborn_values)?;
        let target = equilibrium(&sys, &stubborn_values)?;
        let mode =
            smallest_grounded_eigenpair(&sys.grounded_laplacian(), &SolverConfig::default())?;
        let v = &mode.eigenvector;
        let v_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (lo, hi) = hull(&stubborn_values);
        let mut rng = rng_from_seed(seed);
        loop {
            let y0: Vec<f64> = (0..sys.floating_count())
                .map(|_| rng.random_range(lo - 1.0..=hi + 1.0))
                .collect();
            let diff: Vec<f64> = y0.iter().zip(&target).map(|(a, b)| a - b).collect();
            let dist = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
            let proj = diff.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs() / v_norm;
            if dist > 0.0 && proj >= GENERIC_PROJECTION_FLOOR * dist {
                return ConsensusProblem::new(sys, stubborn_values, y0, horizon);
            }
        }
    }

    pub fn with_gain(mut self, k: f64) -> Result<Self> {
        self.gain = k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_fit_window(mut self, window: f64) -> Result<Self> {
        self.fit_window = window;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        check_stubborn(&self.sys, &self.stubborn_values)?;
        if self.initial.len() != self.sys.floating_count() {
            return Err(Error::InvalidInput(format!(
                "{} initial values for {} floating vertices",
                self.initial.len(),
                self.sys.floating_count()
            )));
        }
        if self.initial.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("initial values must be finite".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gain must be positive, got {}",
                self.gain
            )));
        }
        if !(self.fit_window > 0.0 && self.fit_window <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "fit window {} outside (0, 1]",
                self.fit_window
            )));
        }
        Ok(())
    }

    /// `B·y_S`: for each floating vertex, the sum of its stubborn neighbours' values.
    fn stubborn_input(&self) -> Vec<f64> {
        stubborn_input(&self.sys, &self.stubborn_values)
    }
}

fn check_stubborn(sys: &GroundedSystem, values: &[f64]) -> Result<()> {
    if values.len() != sys.grounded().len() {
        return Err(Error::InvalidInput(format!(
            "{} stubborn values for {} grounded vertices",
            values.len(),
            sys.grounded().len()
        )));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("stubborn values must be finite".into()));
    }
    Ok(())
}

fn hull(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

fn stubborn_input(sys: &GroundedSystem, values: &[f64]) -> Vec<f64> {
    sys.stubborn_links()
        .iter()
        .map(|links| links.iter().map(|&j| values[j]).sum())
        .collect()
}

/// Steady state of the floating agents: the solution of `L_g·Y* = B·y_S`.
///
/// Fails with [`Error::Disconnected`] when some floating component has no
/// stubborn neighbour, since `L_g` is then singular.
pub fn equilibrium(sys: &GroundedSystem, stubborn_values: &[f64]) -> Result<Vec<f64>> {
    check_stubborn(sys, stubborn_values)?;
    let lg = sys.grounded_laplacian();
    for comp in lg.pattern_components() {
        if comp.iter().all(|&i| sys.alpha()[i] == 0) {
            return Err(Error::Disconnected(format!(
                "floating vertex {} has no path to a stubborn agent",
                sys.floating()[comp[0]]
            )));
        }
    }
    solve_spd(&lg, &stubborn_input(sys, stubborn_values), 1e-14)
}

/// Whether every entry of `y` lies in `[min y_S − tol, max y_S + tol]`.
pub fn within_stubborn_hull(y: &[f64], stubborn_values: &[f64], tol: f64) -> bool {
    let (lo, hi) = hull(stubborn_values);
    y.iter().all(|&x| x >= lo - tol && x <= hi + tol)
}

/// Checks that `A_g = I − L_g/k` is entrywise nonnegative and that each row
/// of `[A_g | B/k]` sums to one within `tol`.
pub fn degroot_map_is_stochastic(sys: &GroundedSystem, k: f64, tol: f64) -> bool {
    let lg = sys.grounded_laplacian();
    (0..lg.dim()).all(|i| {
        let mut row_sum = 0.0;
        let mut nonneg = true;
        let mut diag_seen = false;
        for (j, v) in lg.row(i) {
            let a = if i == j {
                diag_seen = true;
                1.0 - v as f64 / k
            } else {
                -(v as f64) / k
            };
            nonneg &= a >= -tol;
            row_sum += a;
        }
        if !diag_seen {
            row_sum += 1.0;
        }
        row_sum += sys.alpha()[i] as f64 / k;
        nonneg && (row_sum - 1.0).abs() <= tol
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// `−slope` of `ln(error)` against time.
    #[serde(with = "sig12")]
    pub rate: f64,
    #[serde(with = "sig12")]
    pub slope: f64,
    #[serde(with = "sig12")]
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `ln(error)` against time over the last `window`
/// fraction of the samples that sit above the noise floor.
///
/// The floor is `max(1e-12·noise_scale, 1e-11·max error)`; the usable
/// samples are the prefix before the first one at or below it. Returns
/// `None` when fewer than ten samples remain.
pub fn fit_rate(samples: &[(f64, f64)], window: f64, noise_scale: f64) -> Option<RateFit> {
    let max_err = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let floor = (1e-12 * noise_scale).max(1e-11 * max_err);
    let usable = samples
        .iter()
        .position(|s| !(s.1 > floor) || !s.1.is_finite())
        .unwrap_or(samples.len());
    let take = ((usable as f64) * window.clamp(0.0, 1.0)).ceil() as usize;
    let tail = &samples[usable - take.min(usable)..usable];
    if tail.len() < MIN_FIT_POINTS {
        return None;
    }
    let m = tail.len() as f64;
    let mt = tail.iter().map(|s| s.0).sum::<f64>() / m;
    let my = tail.iter().map(|s| s.1.ln()).sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(t, e) in tail {
        let (dx, dy) = (t - mt, e.ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Some(RateFit {
        rate: -slope,
        slope,
        r_squared,
        points: tail.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub mode: Mode,
    /// `(time, ‖Y − Y*‖₂)`; time counts steps in discrete mode.
    pub samples: Vec<(f64, f64)>,
    pub fit: Option<RateFit>,
    /// Continuous: the fitted rate. Discrete: the fitted per-step factor `exp(slope)`.
    #[serde(with = "sig12::option")]
    pub fitted: Option<f64>,
    #[serde(with = "sig12")]
    pub fit_window: f64,
    /// Errors are nonincreasing over the fitted tail.
    pub monotone_tail: bool,
    #[serde(with = "sig12::vec")]
    pub equilibrium: Vec<f64>,
    #[serde(with = "sig12::vec")]
    pub final_state: Vec<f64>,
    pub steps: usize,
}

impl ConvergenceTrace {
    fn finish(
        mode: Mode,
        samples: Vec<(f64, f64)>,
        window: f64,
        target: Vec<f64>,
        state: Vec<f64>,
        steps: usize,
    ) -> Self {
        let scale = 1.0 + target.iter().map(|x| x * x).sum::<f64>().sqrt();
        let fit = fit_rate(&samples, window, scale);
        let fitted = fit.map(|f| match mode {
            Mode::Continuous => f.rate,
            Mode::Discrete => f.slope.exp(),
        });
        let monotone_tail = match fit {
            Some(f) => {
                let usable_end = samples
                    .iter()
                    .position(|s| !(s.1 > 1e-12 * scale))
                    .unwrap_or(samples.len());
                let start = usable_end.saturating_sub(f.points);
                samples[start..usable_end]
                    .windows(2)
                    .all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9))
            }
            None => true,
        };
        ConvergenceTrace {
            mode,
            samples,
            fit,
            fitted,
            fit_window: window,
            monotone_tail,
            equilibrium: target,
            final_state: state,
            steps,
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Integrates the continuous dynamics with fixed-step RK4.
///
/// Rejects `dt` above `2.785 / g`, where `g` is the Gershgorin bound on the
/// spectrum of `L_g`, and aborts if the error becomes non-finite or grows
/// past `1e6` times its initial size.
pub fn simulate_continuous(prob: &ConsensusProblem) -> Result<ConvergenceTrace> {
    let lg = prob.sys.grounded_laplacian();
    let max_dt = RK4_STABILITY_LIMIT / lg.gershgorin_bound().max(f64::MIN_POSITIVE);
    if prob.dt > max_dt {
        return Err(Error::Unstable {
            dt: prob.dt,
            max_dt,
        });
    }
    let target = equilibrium(&prob.sys, &prob.stubborn_values)?;
    let b = prob.stubborn_input();
    let dim = lg.dim();
    let steps = (prob.horizon / prob.dt).ceil() as usize;
    let stride = steps.div_ceil(TARGET_SAMPLES).max(1);

    let rhs = |y: &[f64], out: &mut [f64]| {
        lg.mul_vec_into(y, out);
        for i in 0..dim {
            out[i] = b[i] - out[i];
        }
    };
    let mut y = prob.initial.clone();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let h = prob.dt;
    let e0 = distance(&y, &target);
    let blowup = 1e6 * (e0 + 1.0);
    let mut samples = vec![(0.0, e0)];
    for step in 1..=steps {
        rhs(&y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if step % stride == 0 || step == steps {
            let e = distance(&y, &target);
            if !e.is_finite() || e > blowup {
                return Err(Error::Unstable {
                    dt: prob.dt,
                    max_dt,
                });
            }
            samples.push((step as f64 * h, e));
        }
    }
    Ok(ConvergenceTrace::finish(
        Mode::Continuous,
        samples,
        prob.fit_window,
        target,
        y,
        steps,
    ))
}

/// Iterates `Y ← (I − L_g/k)·Y + (B/k)·y_S` for `horizon` steps (rounded up).
pub fn simulate_discrete(prob: &ConsensusProblem) -> Result<ConvergenceTrace> {
    let d_max = prob.sys.graph().max_degree();
    if prob.gain <= d_max as f64 {
        return Err(Error::GainTooSmall {
            k: prob.gain,
            d_max,
        });
    }
    let lg = prob.sys.grounded_laplacian();
    let target = equilibrium(&prob.sys, &prob.stubborn_values)?;
    let b = prob.stubborn_input();
    let dim = lg.dim();
    let k = prob.gain;
    let steps = prob.horizon.ceil() as usize;
    let stride = steps.div_ceil(TARGET_SAMPLES).max(1);

    let mut y = prob.initial.clone();
    let mut ly = vec![0.0; dim];
    let mut samples = vec![(0.0, distance(&y, &target))];
    for step in 1..=steps {
        lg.mul_vec_into(&y, &mut ly);
        for i in 0..dim {
            y[i] += (b[i] - ly[i]) / k;
        }
        if step % stride == 0 || step == steps {
            samples.push((step as f64, distance(&y, &target)));
        }
    }
    Ok(ConvergenceTrace::finish(
        Mode::Discrete,
        samples,
        prob.fit_window,
        target,
        y,
        steps,
    ))
}

pub fn simulate(prob: &ConsensusProblem, mode: Mode) -> Result<ConvergenceTrace> {
    match mode {
        Mode::Continuous => simulate_continuous(prob),
        Mode::Discrete => simulate_discrete(prob),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, path, Graph};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_stubborn_forces_its_value() {
        let g = crate::graph::cycle(7);
        let sys = GroundedSystem::new(g, [3]).unwrap();
        let y = equilibrium(&sys, &[2.5]).unwrap();
        assert!(y.iter().all(|&v| close(v, 2.5, 1e-12)));
    }

    #[test]
    fn path_equilibrium_interpolates() {
        let sys = GroundedSystem::new(path(4), [0, 3]).unwrap();
        let y = equilibrium(&sys, &[0.0, 1.0]).unwrap();
        assert!(close(y[0], 1.0 / 3.0, 1e-12) && close(y[1], 2.0 / 3.0, 1e-12));
    }

    #[test]
    fn complete_graph_equilibrium_is_midpoint() {
        let sys = GroundedSystem::new(complete(4), [2, 3]).unwrap();
        let y = equilibrium(&sys, &[0.0, 1.0]).unwrap();
        assert!(close(y[0], 0.5, 1e-12) && close(y[1], 0.5, 1e-12));
    }

    #[test]
    fn unreachable_floating_component_is_rejected() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let sys = GroundedSystem::new(g, [0]).unwrap();
        assert!(matches!(
            equilibrium(&sys, &[1.0]),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn fit_exact_exponentials() {
        let s: Vec<(f64, f64)> = (0..100)
            .map(|i| (i as f64 * 0.1, (-2.0 * i as f64 * 0.1).exp()))
            .collect();
        let f = fit_rate(&s, 0.5, 1.0).unwrap();
        assert!(close(f.rate, 2.0, 1e-10) && close(f.r_squared, 1.0, 1e-12));
        let s: Vec<(f64, f64)> = (0..100)
            .map(|i| (i as f64, 3.0 * (-0.5 * i as f64).exp()))
            .collect();
        assert!(close(fit_rate(&s, 0.5, 1.0).unwrap().rate, 0.5, 1e-10));
    }

    #[test]
    fn fit_dominant_mode_of_mixture() {
        let s: Vec<(f64, f64)> = (0..=500)
            .map(|i| {
                let t = i as f64 * 0.1;
                (t, 0.9 * (-0.3 * t).exp() + 0.1 * (-3.0 * t).exp())
            })
            .collect();
        assert!(close(fit_rate(&s, 0.5, 1.0).unwrap().rate, 0.3, 1e-9));
    }

    #[test]
    fn fit_undefined_below_noise_floor() {
        let s: Vec<(f64, f64)> = (0..100).map(|i| (i as f64, 1e-17)).collect();
        assert!(fit_rate(&s, 0.5, 1.0).is_none());
        assert!(fit_rate(&[(0.0, 1.0), (1.0, 0.5)], 1.0, 1.0).is_none());
    }

    #[test]
    fn triangle_continuous_decay_is_exact() {
        let sys = GroundedSystem::new(complete(3), [2]).unwrap();
        let prob = ConsensusProblem::new(sys, vec![0.0], vec![1.0, 1.0], 20.0).unwrap();
        let trace = simulate_continuous(&prob).unwrap();
        for &(t, e) in trace.samples.iter().step_by(50) {
            let want = 2f64.sqrt() * (-t).exp();
            assert!(
                ((e - want) / want).abs() < 1e-7 * (1.0 + t),
                "t={t} e={e} want={want}"
            );
        }
        assert!(close(trace.fitted.unwrap(), 1.0, 1e-6));
        assert!(trace.monotone_tail);
    }

    #[test]
    fn path_continuous_rate() {
        let sys = GroundedSystem::new(path(3), [2]).unwrap();
        let prob = ConsensusProblem::with_generic_initial(sys, vec![0.0], 60.0, 1).unwrap();
        let trace = simulate_continuous(&prob).unwrap();
        let want = (3.0 - 5f64.sqrt()) / 2.0;
        assert!(((trace.fitted.unwrap() - want) / want).abs() < 0.01);
    }

    #[test]
    fn start_at_equilibrium_has_no_rate() {
        let sys = GroundedSystem::new(path(4), [0, 3]).unwrap();
        let y0 = equilibrium(&sys, &[0.0, 1.0]).unwrap();
        let prob = ConsensusProblem::new(sys, vec![0.0, 1.0], y0, 30.0).unwrap();
        let c = simulate_continuous(&prob).unwrap();
        assert!(c.fitted.is_none());
        assert!(c.samples.iter().all(|s| s.1 < 1e-12));
        let d = simulate_discrete(&prob.with_gain(3.0).unwrap()).unwrap();
        assert!(d.fitted.is_none());
        assert!(d.samples.iter().all(|s| s.1 < 1e-12));
    }

    #[test]
    fn discrete_contraction_factors() {
        let sys = GroundedSystem::new(complete(3), [2]).unwrap();
        let prob = ConsensusProblem::with_generic_initial(sys, vec![0.0], 60.0, 4)
            .unwrap()
            .with_gain(3.0)
            .unwrap();
        let trace = simulate_discrete(&prob).unwrap();
        assert!(close(trace.fitted.unwrap(), 2.0 / 3.0, 1e-9));

        let sys = GroundedSystem::new(path(3), [2]).unwrap();
        let prob = ConsensusProblem::with_generic_initial(sys, vec![1.0], 400.0, 5)
            .unwrap()
            .with_gain(4.0)
            .unwrap();
        let trace = simulate_discrete(&prob).unwrap();
        let want = 1.0 - (3.0 - 5f64.sqrt()) / 2.0 / 4.0;
        assert!(((trace.fitted.unwrap() - want) / want).abs() < 0.001);
        assert!(close(want, 0.904508, 1e-6));
    }

    #[test]
    fn gain_and_step_checks() {
        let sys = GroundedSystem::new(complete(3), [2]).unwrap();
        let prob = ConsensusProblem::new(sys, vec![0.0], vec![1.0, 1.0], 10.0).unwrap();
        assert!(matches!(
            simulate_discrete(&prob.clone().with_gain(2.0).unwrap()),
            Err(Error::GainTooSmall { d_max: 2, .. })
        ));
        let err = simulate_continuous(&prob.clone().with_dt(2.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
        assert!(prob.clone().with_dt(0.0).is_err());
        assert!(ConsensusProblem::new(prob.sys.clone(), vec![], vec![1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn degroot_map_nonnegative_and_stochastic() {
        let sys = GroundedSystem::new(path(5), [0, 4]).unwrap();
        assert!(degroot_map_is_stochastic(&sys, 3.0, 1e-15));
        assert!(!degroot_map_is_stochastic(&sys, 1.5, 1e-15));
    }

    #[test]
    fn equilibrium_is_convex_combination() {
        let g = crate::graph::dumbbell(10);
        let sys = GroundedSystem::new(g, [0, 4, 9]).unwrap();
        let ys = [-1.0, 3.0, 0.5];
        let y = equilibrium(&sys, &ys).unwrap();
        assert!(within_stubborn_hull(&y, &ys, 1e-12));
    }
}
