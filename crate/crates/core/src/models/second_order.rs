use serde::{Deserialize, Serialize};

use super::{coupling_term, potential_raw, Dynamics};
use crate::error::{Error, Result};
use crate::netgraph::WeightedGraph;
use crate::torus::PhaseState;

/// Spring-interconnected particles: `Mᵢθ̈ᵢ + Dᵢθ̇ᵢ = ωᵢ − Σⱼ aᵢⱼ sin(θᵢ − θⱼ)`.
///
/// State layout is `[θ₁…θₙ, θ̇₁…θ̇ₙ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderNetwork {
    pub graph: WeightedGraph,
    pub omega: Vec<f64>,
    pub inertia: Vec<f64>,
    pub damping: Vec<f64>,
}

impl SecondOrderNetwork {
    pub fn new(graph: WeightedGraph, omega: Vec<f64>, inertia: Vec<f64>, damping: Vec<f64>) -> Result<Self> {
        let n = graph.node_count();
        if omega.len() != n || inertia.len() != n || damping.len() != n {
            return Err(Error::invalid("parameter arrays must have one entry per node"));
        }
        if damping.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::invalid("damping must be strictly positive"));
        }
        if inertia.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::invalid(
                "inertia must be strictly positive; use a power network for first-order nodes",
            ));
        }
        Ok(SecondOrderNetwork { graph, omega, inertia, damping })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Kinetic plus potential energy `Σ ½Mᵢθ̇ᵢ² + U(θ)`.
    pub fn energy(&self, theta: &[f64], thetadot: &[f64]) -> f64 {
        let kinetic: f64 = self
            .inertia
            .iter()
            .zip(thetadot)
            .map(|(m, v)| 0.5 * m * v * v)
            .sum();
        kinetic + potential_raw(&self.graph, theta)
    }
}

impl Dynamics for SecondOrderNetwork {
    fn dim(&self) -> usize {
        2 * self.len()
    }

    fn phase_count(&self) -> usize {
        self.len()
    }

    fn eval(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        let n = self.len();
        let (theta, vel) = state.split_at(n);
        let (dtheta, dvel) = out.split_at_mut(n);
        coupling_term(&self.graph, theta, dvel);
        for i in 0..n {
            dtheta[i] = vel[i];
            dvel[i] = (self.omega[i] - self.damping[i] * vel[i] - dvel[i]) / self.inertia[i];
        }
    }

    fn graph(&self) -> Option<&WeightedGraph> {
        Some(&self.graph)
    }
}

/// First-order form `(dθ/dt, dθ̇/dt)` of the second-order network.
pub fn second_order_rhs(
    net: &SecondOrderNetwork,
    theta: &PhaseState,
    thetadot: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = net.len();
    if theta.len() != n || thetadot.len() != n {
        return Err(Error::invalid("state sizes do not match the network"));
    }
    let mut state = theta.as_slice().to_vec();
    state.extend_from_slice(thetadot);
    let mut out = vec![0.0; 2 * n];
    net.eval(0.0, &state, &mut out);
    let dvel = out.split_off(n);
    Ok((out, dvel))
}
