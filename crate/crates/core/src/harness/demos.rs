use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{opt17, stream_rng, uniform_phases, Csv};
use crate::error::{Error, Result};
use crate::integrate::{detect_frequency_sync, fmt17, integrate, IntegratorConfig, SyncCriteria, SyncVerdict, Trajectory};
use crate::models::{two_oscillator_f, BalanceFlow, PowerNetwork, TwoOscillatorDifference, VehicleSwarm};
use crate::netgraph::WeightedGraph;
use crate::torus::{self, Angle, PhaseState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BifurcationParams {
    pub kappas: Vec<f64>,
    pub delta0: Vec<f64>,
}

impl Default for BifurcationParams {
    fn default() -> Self {
        BifurcationParams {
            kappas: vec![0.5, 0.9, 1.1, 1.25, 1.5, 2.0, 3.0],
            delta0: vec![-1.0, 0.1, 1.5, 2.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BifurcationOutcome {
    /// Settled on the stable equilibrium branch.
    Converged,
    /// Still moving at the horizon.
    Revolving,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub kappa: f64,
    pub delta0: f64,
    /// Final difference in `(−π, π]`.
    pub delta_final: f64,
    pub outcome: BifurcationOutcome,
    /// Number of times δ crossed π (mod 2π).
    pub wraps: i64,
    pub stable_equilibrium: Option<f64>,
    pub saddle_equilibrium: Option<f64>,
}

impl BifurcationRow {
    pub fn csv(rows: &[BifurcationRow]) -> Csv {
        let mut csv = Csv::new(&[
            "kappa",
            "delta0",
            "delta_final",
            "outcome",
            "wraps",
            "stable_equilibrium",
            "saddle_equilibrium",
        ]);
        for r in rows {
            let outcome = match r.outcome {
                BifurcationOutcome::Converged => "converged",
                BifurcationOutcome::Revolving => "revolving",
            };
            csv.row(&[
                fmt17(r.kappa),
                fmt17(r.delta0),
                fmt17(r.delta_final),
                outcome.to_string(),
                r.wraps.to_string(),
                opt17(r.stable_equilibrium),
                opt17(r.saddle_equilibrium),
            ]);
        }
        csv
    }
}

/// `|f_κ(δ)|` below which the scalar flow counts as settled.
const SETTLED: f64 = 1e-8;

fn principal(x: f64) -> f64 {
    let w = torus::wrap_unchecked(x);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Sweep of the two-oscillator difference flow `dδ/dt = 1 − κ sin δ`.
pub fn run_bifurcation2(params: &BifurcationParams, integrator: &IntegratorConfig) -> Result<Vec<BifurcationRow>> {
    if params.kappas.iter().chain(&params.delta0).any(|x| !x.is_finite()) {
        return Err(Error::invalid("bifurcation grid values must be finite"));
    }
    if params.kappas.iter().any(|&k| k < 0.0) {
        return Err(Error::invalid("coupling ratios κ must be nonnegative"));
    }
    let cases: Vec<(f64, f64)> = params
        .kappas
        .iter()
        .flat_map(|&k| params.delta0.iter().map(move |&d| (k, d)))
        .collect();
    cases
        .par_iter()
        .map(|&(kappa, delta0)| {
            let traj = integrate(&TwoOscillatorDifference { kappa }, &[delta0], integrator)?;
            let end = traj.unwrapped.last().expect("nonempty")[0];
            let crossings = |x: f64| ((x + PI) / TAU).floor() as i64;
            let (stable, saddle) = if kappa >= 1.0 {
                let s = (1.0 / kappa).asin();
                (Some(s), Some(PI - s))
            } else {
                (None, None)
            };
            let settled = two_oscillator_f(kappa, end).abs() < SETTLED;
            Ok(BifurcationRow {
                kappa,
                delta0,
                delta_final: principal(end),
                outcome: if settled { BifurcationOutcome::Converged } else { BifurcationOutcome::Revolving },
                wraps: crossings(end) - crossings(delta0),
                stable_equilibrium: stable,
                saddle_equilibrium: saddle,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    pub n: usize,
    pub gain: f64,
    pub omega0: f64,
    /// Initial positions are uniform in `[−spread, spread]²`.
    pub spread: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams { n: 6, gain: 1.0, omega0: 1.0, spread: 5.0 }
    }
}

#[derive(Debug, Clone)]
pub struct VehicleRun {
    pub trajectory: Trajectory,
    pub final_r: f64,
}

impl VehicleRun {
    /// Columns `t, theta_i…, x_i…, y_i…, r`.
    pub fn csv(&self) -> Csv {
        let n = self.trajectory.states[0].len();
        let mut header = vec!["t".to_string()];
        for prefix in ["theta", "x", "y"] {
            header.extend((0..n).map(|i| format!("{prefix}_{i}")));
        }
        header.push("r".into());
        let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
        let tr = &self.trajectory;
        for k in 0..tr.len() {
            let mut row = vec![fmt17(tr.times[k])];
            row.extend(tr.states[k].as_slice().iter().map(|x| fmt17(*x)));
            row.extend(tr.extras[k].iter().map(|x| fmt17(*x)));
            row.push(fmt17(tr.order[k]));
            csv.row(&row);
        }
        csv
    }
}

/// Planar unit-speed vehicles on the complete graph with weights `1/n`,
/// random initial headings and positions from stream `trial` of `seed`.
pub fn run_vehicles(params: &VehicleParams, integrator: &IntegratorConfig, seed: u64, trial: u64) -> Result<VehicleRun> {
    if params.n < 2 {
        return Err(Error::invalid("need at least two vehicles"));
    }
    if !(params.spread >= 0.0) {
        return Err(Error::invalid("position spread must be nonnegative"));
    }
    let n = params.n;
    let mut rng = stream_rng(seed, trial);
    let headings = PhaseState::new(uniform_phases(n, &mut rng))?;
    let positions = (0..n)
        .map(|_| {
            let s = params.spread;
            (s * (2.0 * rng.gen::<f64>() - 1.0), s * (2.0 * rng.gen::<f64>() - 1.0))
        })
        .collect();
    let graph = WeightedGraph::complete(n, 1.0 / n as f64)?;
    let swarm = VehicleSwarm::new(graph, params.gain, params.omega0, positions, headings)?;
    let trajectory = integrate(&swarm, &swarm.initial_state(), integrator)?;
    let final_r = *trajectory.order.last().expect("nonempty");
    Ok(VehicleRun { trajectory, final_r })
}

#[derive(Debug, Clone)]
pub struct PowerRun {
    pub trajectory: Trajectory,
    pub verdict: SyncVerdict,
    /// `ΣP / ΣD`.
    pub expected_frequency: f64,
    /// `|sync_frequency − ΣP/ΣD|` when synchronized.
    pub frequency_error: Option<f64>,
    /// Whether the network has no generator buses.
    pub first_order: bool,
}

#[derive(Serialize)]
struct PowerReport<'a> {
    #[serde(flatten)]
    verdict: &'a SyncVerdict,
    expected_frequency: f64,
    frequency_error: Option<f64>,
    first_order: bool,
}

impl PowerRun {
    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&PowerReport {
            verdict: &self.verdict,
            expected_frequency: self.expected_frequency,
            frequency_error: self.frequency_error,
            first_order: self.first_order,
        })
        .expect("plain data serializes")
    }
}

/// Integrates the power network from `theta0` (all zero by default) with
/// generators at rest.
pub fn run_powergrid(
    net: &PowerNetwork,
    theta0: Option<&PhaseState>,
    integrator: &IntegratorConfig,
    sync: &SyncCriteria,
) -> Result<PowerRun> {
    let zero;
    let theta0 = match theta0 {
        Some(t) => t,
        None => {
            zero = PhaseState::synchronized(net.len(), 0.0)?;
            &zero
        }
    };
    let trajectory = integrate(net, &net.initial_state(theta0)?, integrator)?;
    let verdict = detect_frequency_sync(&trajectory, sync.tol, sync.window)?;
    let expected_frequency = net.sync_frequency();
    let frequency_error = verdict.frequency_synced.then(|| (verdict.sync_frequency - expected_frequency).abs());
    Ok(PowerRun {
        trajectory,
        verdict,
        expected_frequency,
        frequency_error,
        first_order: net.generators().is_empty(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BalanceInitial {
    /// Independent uniform phases.
    Random,
    /// Splay state with a random offset plus uniform noise of the given
    /// half-width on each phase.
    NearSplay { perturbation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceParams {
    pub initial: BalanceInitial,
    /// Final order parameter below which a run counts as balanced.
    pub tolerance: f64,
    /// Coupling graph; the complete graph on `n` nodes with unit weights when
    /// absent.
    pub graph: Option<std::path::PathBuf>,
    pub n: usize,
}

impl Default for BalanceParams {
    fn default() -> Self {
        BalanceParams { initial: BalanceInitial::Random, tolerance: 0.01, graph: None, n: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceRow {
    pub trial: usize,
    pub final_r: f64,
    /// Largest deviation of the sorted final phases from equal spacing.
    pub splay_distance: f64,
    pub balanced: bool,
}

#[derive(Debug, Clone)]
pub struct BalanceOutput {
    pub rows: Vec<BalanceRow>,
    /// Trajectory of trial 0.
    pub first_trajectory: Trajectory,
    /// Set when the graph is not connected, uniformly weighted and circulant.
    pub warning: Option<String>,
}

impl BalanceOutput {
    pub fn balanced_count(&self) -> usize {
        self.rows.iter().filter(|r| r.balanced).count()
    }

    pub fn csv(&self) -> Csv {
        let mut csv = Csv::new(&["trial", "final_r", "splay_distance", "balanced"]);
        for r in &self.rows {
            csv.row(&[r.trial.to_string(), fmt17(r.final_r), fmt17(r.splay_distance), r.balanced.to_string()]);
        }
        csv
    }
}

/// Distance of `theta` from the splay set: sort the phases, subtract
/// `2πk/n`, and take the largest geodesic distance of the residuals from
/// their circular mean.
pub fn splay_distance(theta: &PhaseState) -> f64 {
    let n = theta.len();
    let mut sorted = theta.as_slice().to_vec();
    sorted.sort_by(f64::total_cmp);
    let residuals: Vec<f64> = sorted.iter().enumerate().map(|(k, x)| x - TAU * k as f64 / n as f64).collect();
    let (s, c) = residuals.iter().fold((0.0, 0.0), |(s, c), x| (s + x.sin(), c + x.cos()));
    let center = torus::wrap_unchecked(s.atan2(c));
    residuals
        .iter()
        .map(|&x| torus::geodesic_distance(Angle::new(x).expect("finite"), Angle::new(center).expect("finite")))
        .fold(0.0, f64::max)
}

/// Balancing flow `dθᵢ/dt = Σⱼ aᵢⱼ sin(θᵢ − θⱼ)` from `trials` initial
/// states drawn on per-trial streams of `seed`.
pub fn run_balance(
    graph: &WeightedGraph,
    params: &BalanceParams,
    integrator: &IntegratorConfig,
    seed: u64,
    trials: usize,
) -> Result<BalanceOutput> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if !(params.tolerance > 0.0) {
        return Err(Error::invalid("balance tolerance must be positive"));
    }
    if let BalanceInitial::NearSplay { perturbation } = params.initial {
        if !(perturbation >= 0.0 && perturbation.is_finite()) {
            return Err(Error::invalid("perturbation must be a nonnegative number"));
        }
    }
    let warning = if !graph.is_connected() || !graph.is_uniformly_weighted() || !graph.is_circulant() {
        Some("graph is not connected, uniformly weighted and circulant; phase balancing is not guaranteed".to_string())
    } else {
        None
    };
    let n = graph.node_count();
    let flow = BalanceFlow { graph: graph.clone() };
    let results: Vec<Result<(BalanceRow, Option<Trajectory>)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(seed, trial as u64);
            let theta0 = match params.initial {
                BalanceInitial::Random => uniform_phases(n, &mut rng),
                BalanceInitial::NearSplay { perturbation } => {
                    let phi = TAU * rng.gen::<f64>();
                    torus::splay_state(n, Angle::new(phi)?)?
                        .as_slice()
                        .iter()
                        .map(|x| x + perturbation * (2.0 * rng.gen::<f64>() - 1.0))
                        .collect()
                }
            };
            let traj = integrate(&flow, &theta0, integrator)?;
            let final_r = *traj.order.last().expect("nonempty");
            let row = BalanceRow {
                trial,
                final_r,
                splay_distance: splay_distance(traj.final_state()),
                balanced: final_r < params.tolerance,
            };
            Ok((row, (trial == 0).then_some(traj)))
        })
        .collect();
    let mut rows = Vec::with_capacity(trials);
    let mut first = None;
    for r in results {
        let (row, traj) = r?;
        rows.push(row);
        if traj.is_some() {
            first = traj;
        }
    }
    Ok(BalanceOutput { rows, first_trajectory: first.expect("trial 0 ran"), warning })
}
