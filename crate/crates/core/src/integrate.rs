//! Fixed-step RK4 integration with synchronization monitors.
//!
//! Phases are advanced twice in lockstep: once wrapped to `[0, 2π)` after
//! every step and once unwrapped, so that modular quantities and
//! conservation laws can both be checked on the same run.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Dynamics, MeanFieldKuramoto};
use crate::torus::{self, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Step size h.
    pub step: f64,
    /// Final time T.
    pub horizon: f64,
    /// Record every `stride`-th step (the final step is always recorded).
    pub stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { step: 1e-2, horizon: 100.0, stride: 10 }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64, horizon: f64, stride: usize) -> Result<Self> {
        let cfg = IntegratorConfig { step, horizon, stride };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::invalid(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon >= self.step) || !self.horizon.is_finite() {
            return Err(Error::invalid(format!("horizon {} shorter than one step", self.horizon)));
        }
        if self.stride == 0 {
            return Err(Error::invalid("record stride must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps; the horizon is rounded to a whole number of steps.
    pub fn steps(&self) -> usize {
        (self.horizon / self.step - 1e-9).ceil().max(1.0) as usize
    }
}

/// Recorded samples of a run together with their monitor traces.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Wrapped phases.
    pub states: Vec<PhaseState>,
    /// Phases accumulated without wrapping.
    pub unwrapped: Vec<Vec<f64>>,
    /// Non-phase coordinates (velocities, positions), possibly empty.
    pub extras: Vec<Vec<f64>>,
    /// Instantaneous phase velocities dθ/dt at each sample.
    pub rates: Vec<Vec<f64>>,
    /// Shortest containing arc length V(θ).
    pub arc: Vec<f64>,
    /// ½‖B_cᵀθ‖² in the chart of the containing arc; `None` outside an open
    /// half circle.
    pub disagreement: Vec<Option<f64>>,
    /// Order parameter magnitude r(θ).
    pub order: Vec<f64>,
    /// Largest edge-wise geodesic distance, when the model has a graph.
    pub edge_distance: Vec<Option<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &PhaseState {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    pub fn monitor_arc(&self) -> &[f64] {
        &self.arc
    }

    pub fn monitor_disagreement(&self) -> &[Option<f64>] {
        &self.disagreement
    }

    pub fn monitor_order(&self) -> &[f64] {
        &self.order
    }

    /// Indices of samples with `t ≥ t_end − window`.
    fn window_range(&self, window: f64) -> Result<std::ops::Range<usize>> {
        if self.is_empty() {
            return Err(Error::invalid("empty trajectory"));
        }
        let span = self.final_time() - self.times[0];
        if !(window > 0.0) || window > span + 1e-9 {
            return Err(Error::invalid(format!("window {window} outside (0, {span}]")));
        }
        let cutoff = self.final_time() - window - 1e-9;
        let start = self.times.partition_point(|&t| t < cutoff);
        if start >= self.len() {
            return Err(Error::invalid("window contains no samples"));
        }
        Ok(start..self.len())
    }

    /// CSV with header `t,theta_0..theta_{n-1},V,W,r`; 17 significant
    /// digits, `W` empty where undefined.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, PhaseState::len);
        let mut out = String::from("t");
        for i in 0..n {
            out.push_str(&format!(",theta_{i}"));
        }
        out.push_str(",V,W,r\n");
        for k in 0..self.len() {
            out.push_str(&fmt17(self.times[k]));
            for &x in self.states[k].as_slice() {
                out.push(',');
                out.push_str(&fmt17(x));
            }
            out.push(',');
            out.push_str(&fmt17(self.arc[k]));
            out.push(',');
            if let Some(w) = self.disagreement[k] {
                out.push_str(&fmt17(w));
            }
            out.push(',');
            out.push_str(&fmt17(self.order[k]));
            out.push('\n');
        }
        out
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// ½‖B_cᵀθ‖² = (n/2)·Σ(θᵢ − θ̄)² evaluated in the unwrapped chart of the
/// shortest containing arc; `None` when that arc is not shorter than π.
pub fn disagreement(theta: &[f64]) -> Option<f64> {
    if torus::arc_length_raw(theta) >= PI {
        return None;
    }
    let (_, x) = torus::unwrap_in_arc(theta);
    Some(0.5 * theta.len() as f64 * centered_sq_norm(&x))
}

/// `‖x − mean(x)·1‖²`.
pub fn centered_sq_norm(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum()
}

struct Recorder<'a, D: ?Sized> {
    dynamics: &'a D,
    traj: Trajectory,
    scratch: Vec<f64>,
}

impl<'a, D: Dynamics + ?Sized> Recorder<'a, D> {
    fn record(&mut self, t: f64, wrapped: &[f64], unwrapped: &[f64]) {
        let np = self.dynamics.phase_count();
        self.dynamics.eval(t, wrapped, &mut self.scratch);
        let phases = &wrapped[..np];
        self.traj.times.push(t);
        self.traj.states.push(PhaseState::new(phases.to_vec()).expect("finite wrapped phases"));
        self.traj.unwrapped.push(unwrapped[..np].to_vec());
        self.traj.extras.push(wrapped[np..].to_vec());
        self.traj.rates.push(self.scratch[..np].to_vec());
        self.traj.arc.push(torus::arc_length_raw(phases));
        self.traj.disagreement.push(disagreement(phases));
        self.traj.order.push(torus::order_parameter_raw(phases).r);
        self.traj
            .edge_distance
            .push(self.dynamics.graph().map(|g| torus::max_edge_distance_raw(phases, g)));
    }
}

/// Classical fourth-order Runge–Kutta with fixed step.
///
/// `initial` is the full state vector of the model (phases first).
pub fn integrate<D: Dynamics + ?Sized>(dynamics: &D, initial: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let dim = dynamics.dim();
    let np = dynamics.phase_count();
    if initial.len() != dim {
        return Err(Error::invalid(format!("initial state has {} entries, model needs {dim}", initial.len())));
    }
    if initial.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("initial state must be finite"));
    }
    let h = cfg.step;
    let steps = cfg.steps();

    let mut wrapped = initial.to_vec();
    for x in &mut wrapped[..np] {
        *x = torus::wrap_unchecked(*x);
    }
    let mut unwrapped = initial.to_vec();

    let mut rec = Recorder { dynamics, traj: Trajectory::default(), scratch: vec![0.0; dim] };
    rec.record(0.0, &wrapped, &unwrapped);

    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    for step in 1..=steps {
        let t = (step - 1) as f64 * h;
        dynamics.eval(t, &wrapped, &mut k1);
        for i in 0..dim {
            tmp[i] = wrapped[i] + 0.5 * h * k1[i];
        }
        dynamics.eval(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = wrapped[i] + 0.5 * h * k2[i];
        }
        dynamics.eval(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = wrapped[i] + h * k3[i];
        }
        dynamics.eval(t + h, &tmp, &mut k4);
        for i in 0..dim {
            let delta = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            wrapped[i] += delta;
            unwrapped[i] += delta;
        }
        let t_next = step as f64 * h;
        if wrapped.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalBlowup { time: t_next });
        }
        for x in &mut wrapped[..np] {
            *x = torus::wrap_unchecked(*x);
        }
        if step % cfg.stride == 0 || step == steps {
            rec.record(t_next, &wrapped, &unwrapped);
        }
    }
    Ok(rec.traj)
}

/// Per-node mean of the recorded instantaneous frequencies over the
/// trailing `window`.
pub fn estimate_frequencies(traj: &Trajectory, window: f64) -> Result<Vec<f64>> {
    let range = traj.window_range(window)?;
    let count = range.len() as f64;
    let n = traj.rates[0].len();
    let mut mean = vec![0.0; n];
    for k in range {
        for (m, r) in mean.iter_mut().zip(&traj.rates[k]) {
            *m += r;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    Ok(mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncCriteria {
    /// Largest admissible spread max ωᵢ(t) − min ωᵢ(t) of instantaneous
    /// frequencies (rad/s).
    pub tol: f64,
    /// Trailing window over which the spread must stay below `tol`.
    pub window: f64,
}

impl Default for SyncCriteria {
    fn default() -> Self {
        SyncCriteria { tol: 1e-4, window: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncVerdict {
    pub frequency_synced: bool,
    /// Node average of the window-averaged frequencies.
    pub sync_frequency: f64,
    /// First sample time after which the spread stays below tolerance.
    pub settle_time: Option<f64>,
    /// Shortest containing arc of the final state.
    pub final_cohesiveness: f64,
    pub final_r: f64,
}

fn spread(x: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Frequency synchronization: every sample in the trailing window has
/// instantaneous frequency spread below `tol`.
pub fn detect_frequency_sync(traj: &Trajectory, tol: f64, window: f64) -> Result<SyncVerdict> {
    if !(tol > 0.0) {
        return Err(Error::invalid("sync tolerance must be positive"));
    }
    let range = traj.window_range(window)?;
    let freqs = estimate_frequencies(traj, window)?;
    let synced = range.clone().all(|k| spread(&traj.rates[k]) < tol);
    let settle_time = synced.then(|| {
        let first_bad = (0..traj.len()).rev().find(|&k| spread(&traj.rates[k]) >= tol);
        traj.times[first_bad.map_or(0, |k| k + 1)]
    });
    Ok(SyncVerdict {
        frequency_synced: synced,
        sync_frequency: freqs.iter().sum::<f64>() / freqs.len() as f64,
        settle_time,
        final_cohesiveness: *traj.arc.last().expect("nonempty"),
        final_r: *traj.order.last().expect("nonempty"),
    })
}

/// Whether the all-to-all Kuramoto model with coupling `k` synchronizes
/// from `theta0` within the configured horizon.
pub fn kuramoto_synchronizes(
    k: f64,
    omega: &[f64],
    theta0: &PhaseState,
    cfg: &IntegratorConfig,
    criteria: &SyncCriteria,
) -> Result<bool> {
    let model = MeanFieldKuramoto { k, omega: omega.to_vec() };
    let traj = integrate(&model, theta0.as_slice(), cfg)?;
    Ok(detect_frequency_sync(&traj, criteria.tol, criteria.window)?.frequency_synced)
}

/// Bisection on K, using simulated frequency synchronization as the
/// oracle, to absolute tolerance 1e−3.
pub fn empirical_critical_coupling(
    omega: &[f64],
    theta0: &PhaseState,
    bracket: (f64, f64),
    cfg: &IntegratorConfig,
    criteria: &SyncCriteria,
) -> Result<f64> {
    const TOL: f64 = 1e-3;
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Bracket(format!("need 0 < K_lo < K_hi, got ({lo}, {hi})")));
    }
    if omega.len() != theta0.len() {
        return Err(Error::invalid("omega and theta0 lengths differ"));
    }
    if kuramoto_synchronizes(lo, omega, theta0, cfg, criteria)? {
        return Err(Error::Bracket(format!("already synchronized at K_lo = {lo}; widen the bracket")));
    }
    if !kuramoto_synchronizes(hi, omega, theta0, cfg, criteria)? {
        return Err(Error::Bracket(format!("not synchronized at K_hi = {hi}; widen the bracket")));
    }
    while hi - lo > TOL {
        let mid = 0.5 * (lo + hi);
        if kuramoto_synchronizes(mid, omega, theta0, cfg, criteria)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
