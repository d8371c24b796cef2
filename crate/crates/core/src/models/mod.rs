//! Right-hand sides, energies and Jacobians of the oscillator models.
//!
//! Every model implements [`Dynamics`] so the integrator can treat them
//! uniformly. State vectors always start with the `n` phase angles; models
//! with inertia or positions append their extra coordinates after them.

mod clock;
mod file;
mod power;
mod second_order;
mod vehicles;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{weighted_laplacian, WeightedGraph};
use crate::torus::PhaseState;

pub use clock::{clock_rhs, ClockNetwork, CouplingFn};
pub use file::{GraphSource, ModelFile};
pub use power::{power_rhs, Bus, PowerFile, PowerNetwork};
pub use second_order::{second_order_rhs, SecondOrderNetwork};
pub use vehicles::{vehicle_rhs, EdgeWeightFn, TimeFn, VehicleSwarm};

/// An autonomous or time-varying vector field on a state whose first
/// `phase_count()` coordinates are angles.
pub trait Dynamics {
    fn dim(&self) -> usize;

    fn phase_count(&self) -> usize;

    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]);

    /// Coupling graph used for edge-distance monitoring, if any.
    fn graph(&self) -> Option<&WeightedGraph> {
        None
    }
}

/// Coupling graph plus natural frequencies: `dθᵢ/dt = ωᵢ − Σⱼ aᵢⱼ sin(θᵢ − θⱼ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorNetwork {
    graph: WeightedGraph,
    omega: Vec<f64>,
}

impl OscillatorNetwork {
    pub fn new(graph: WeightedGraph, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != graph.node_count() {
            return Err(Error::invalid(format!(
                "{} natural frequencies for {} nodes",
                omega.len(),
                graph.node_count()
            )));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("natural frequencies must be finite"));
        }
        Ok(OscillatorNetwork { graph, omega })
    }

    /// Complete graph with uniform weights `K/n`.
    pub fn kuramoto(k: f64, omega: Vec<f64>) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::invalid(format!("coupling K must be positive, got {k}")));
        }
        let n = omega.len();
        Self::new(WeightedGraph::complete(n, k / n as f64)?, omega)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn mean_frequency(&self) -> f64 {
        self.omega.iter().sum::<f64>() / self.omega.len() as f64
    }

    pub fn is_zero_mean(&self) -> bool {
        self.omega.iter().sum::<f64>().abs() < 1e-9
    }

    /// Same network in the frame rotating at the mean frequency, and the
    /// shift that was removed.
    pub fn centered(&self) -> (Self, f64) {
        let mean = self.mean_frequency();
        let omega = self.omega.iter().map(|w| w - mean).collect();
        (OscillatorNetwork { graph: self.graph.clone(), omega }, mean)
    }

    pub fn with_omega(&self, omega: Vec<f64>) -> Result<Self> {
        Self::new(self.graph.clone(), omega)
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.len() {
            return Err(Error::invalid(format!(
                "state has {} angles, network has {} nodes",
                theta.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// `Σⱼ aᵢⱼ sin(θᵢ − θⱼ)` written into `out`.
    pub(crate) fn coupling_into(&self, theta: &[f64], out: &mut [f64]) {
        coupling_term(&self.graph, theta, out)
    }

    pub(crate) fn rhs_into(&self, theta: &[f64], out: &mut [f64]) {
        self.coupling_into(theta, out);
        for (o, w) in out.iter_mut().zip(&self.omega) {
            *o = w - *o;
        }
    }
}

/// Edge-wise accumulation of `Σⱼ aᵢⱼ sin(θᵢ − θⱼ)`.
pub(crate) fn coupling_term(graph: &WeightedGraph, theta: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for e in graph.edges() {
        let flow = e.weight * (theta[e.source] - theta[e.sink]).sin();
        out[e.source] += flow;
        out[e.sink] -= flow;
    }
}

impl Dynamics for OscillatorNetwork {
    fn dim(&self) -> usize {
        self.len()
    }

    fn phase_count(&self) -> usize {
        self.len()
    }

    fn eval(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        self.rhs_into(state, out)
    }

    fn graph(&self) -> Option<&WeightedGraph> {
        Some(&self.graph)
    }
}

pub fn coupled_rhs(net: &OscillatorNetwork, theta: &PhaseState) -> Result<Vec<f64>> {
    net.check(theta.as_slice())?;
    let mut out = vec![0.0; net.len()];
    net.rhs_into(theta.as_slice(), &mut out);
    Ok(out)
}

/// `U(θ) = Σ_{edges} aᵢⱼ (1 − cos(θᵢ − θⱼ))`.
pub fn potential_energy(net: &OscillatorNetwork, theta: &PhaseState) -> Result<f64> {
    net.check(theta.as_slice())?;
    Ok(potential_raw(&net.graph, theta.as_slice()))
}

pub(crate) fn potential_raw(graph: &WeightedGraph, theta: &[f64]) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| e.weight * (1.0 - (theta[e.source] - theta[e.sink]).cos()))
        .sum()
}

/// `∇U(θ)`, so that the network flow is `ω − ∇U(θ)`.
pub fn potential_gradient(net: &OscillatorNetwork, theta: &PhaseState) -> Result<Vec<f64>> {
    net.check(theta.as_slice())?;
    let mut out = vec![0.0; net.len()];
    net.coupling_into(theta.as_slice(), &mut out);
    Ok(out)
}

/// `J(θ) = −B·diag(aᵢⱼ cos(θᵢ − θⱼ))·Bᵀ`.
pub fn jacobian(net: &OscillatorNetwork, theta: &PhaseState) -> Result<DMatrix<f64>> {
    net.check(theta.as_slice())?;
    Ok(jacobian_raw(&net.graph, theta.as_slice()))
}

pub(crate) fn jacobian_raw(graph: &WeightedGraph, theta: &[f64]) -> DMatrix<f64> {
    -weighted_laplacian(graph.node_count(), graph.edges(), |e| {
        e.weight * (theta[e.source] - theta[e.sink]).cos()
    })
}

/// Time-reversed identical-frequency flow `dθᵢ/dt = Σⱼ aᵢⱼ sin(θᵢ − θⱼ)`.
pub fn balance_rhs(net: &OscillatorNetwork, theta: &PhaseState) -> Result<Vec<f64>> {
    net.check(theta.as_slice())?;
    let mut out = vec![0.0; net.len()];
    net.coupling_into(theta.as_slice(), &mut out);
    Ok(out)
}

/// Balancing flow on a graph; natural frequencies are ignored.
#[derive(Debug, Clone)]
pub struct BalanceFlow {
    pub graph: WeightedGraph,
}

impl Dynamics for BalanceFlow {
    fn dim(&self) -> usize {
        self.graph.node_count()
    }

    fn phase_count(&self) -> usize {
        self.graph.node_count()
    }

    fn eval(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        coupling_term(&self.graph, state, out)
    }

    fn graph(&self) -> Option<&WeightedGraph> {
        Some(&self.graph)
    }
}

/// All-to-all Kuramoto model evaluated pairwise:
/// `ωᵢ − (K/n) Σⱼ sin(θᵢ − θⱼ)`.
pub fn kuramoto_rhs(k: f64, omega: &[f64], theta: &PhaseState) -> Result<Vec<f64>> {
    check_kuramoto(k, omega, theta)?;
    let th = theta.as_slice();
    let n = th.len() as f64;
    Ok(th
        .iter()
        .zip(omega)
        .map(|(&ti, &wi)| wi - k / n * th.iter().map(|&tj| (ti - tj).sin()).sum::<f64>())
        .collect())
}

/// Same vector field through the order parameter: `ωᵢ − K r sin(θᵢ − ψ)`.
pub fn kuramoto_rhs_mean_field(k: f64, omega: &[f64], theta: &PhaseState) -> Result<Vec<f64>> {
    check_kuramoto(k, omega, theta)?;
    let mut out = vec![0.0; omega.len()];
    MeanFieldKuramoto::eval_raw(k, omega, theta.as_slice(), &mut out);
    Ok(out)
}

fn check_kuramoto(k: f64, omega: &[f64], theta: &PhaseState) -> Result<()> {
    if !(k > 0.0) {
        return Err(Error::invalid(format!("coupling K must be positive, got {k}")));
    }
    if omega.len() != theta.len() {
        return Err(Error::invalid("omega and theta lengths differ"));
    }
    Ok(())
}

/// O(n) Kuramoto vector field for large all-to-all networks.
#[derive(Debug, Clone)]
pub struct MeanFieldKuramoto {
    pub k: f64,
    pub omega: Vec<f64>,
}

impl MeanFieldKuramoto {
    fn eval_raw(k: f64, omega: &[f64], theta: &[f64], out: &mut [f64]) {
        let n = theta.len() as f64;
        let (s, c) = theta
            .iter()
            .fold((0.0, 0.0), |(s, c), &x| (s + x.sin(), c + x.cos()));
        let (s, c) = (s / n, c / n);
        // r·sin(θᵢ − ψ) = sin θᵢ · r cos ψ − cos θᵢ · r sin ψ
        for ((o, &x), &w) in out.iter_mut().zip(theta).zip(omega) {
            *o = w - k * (x.sin() * c - x.cos() * s);
        }
    }
}

impl Dynamics for MeanFieldKuramoto {
    fn dim(&self) -> usize {
        self.omega.len()
    }

    fn phase_count(&self) -> usize {
        self.omega.len()
    }

    fn eval(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        Self::eval_raw(self.k, &self.omega, state, out)
    }
}

/// Scaled two-oscillator difference dynamics `f_κ(δ) = 1 − κ sin δ`.
pub fn two_oscillator_f(kappa: f64, delta: f64) -> f64 {
    1.0 - kappa * delta.sin()
}

/// The scalar flow `dδ/dt = f_κ(δ)` as a one-phase system.
#[derive(Debug, Clone, Copy)]
pub struct TwoOscillatorDifference {
    pub kappa: f64,
}

impl Dynamics for TwoOscillatorDifference {
    fn dim(&self) -> usize {
        1
    }

    fn phase_count(&self) -> usize {
        1
    }

    fn eval(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        out[0] = two_oscillator_f(self.kappa, state[0]);
    }
}
