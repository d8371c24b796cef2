use serde::{Deserialize, Serialize};

use super::{coupling_term, Dynamics, OscillatorNetwork};
use crate::error::{Error, Result};
use crate::netgraph::WeightedGraph;
use crate::torus::PhaseState;

/// One bus of a lossless structure-preserving power network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Bus {
    /// `Dθ̇ + P_l = −Σ a sin(Δθ)` with constant demand `P_l > 0`.
    Load { demand: f64, damping: f64 },
    /// Swing equation `Mθ̈ + Dθ̇ = P_m − Σ a sin(Δθ)`.
    Generator { power: f64, inertia: f64, damping: f64 },
    /// Droop-controlled inverter `Dθ̇ = P_d − Σ a sin(Δθ)`.
    Inverter { power: f64, damping: f64 },
}

impl Bus {
    /// Net injected power; loads inject `−P_l`.
    pub fn injection(&self) -> f64 {
        match *self {
            Bus::Load { demand, .. } => -demand,
            Bus::Generator { power, .. } | Bus::Inverter { power, .. } => power,
        }
    }

    pub fn damping(&self) -> f64 {
        match *self {
            Bus::Load { damping, .. } | Bus::Generator { damping, .. } | Bus::Inverter { damping, .. } => damping,
        }
    }

    fn validate(&self, i: usize) -> Result<()> {
        let ok = match *self {
            Bus::Load { demand, damping } => demand.is_finite() && damping > 0.0,
            Bus::Generator { power, inertia, damping } => power.is_finite() && inertia > 0.0 && damping > 0.0,
            Bus::Inverter { power, damping } => power.is_finite() && damping > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("bus {i} has invalid parameters: {self:?}")))
        }
    }
}

/// Loads, generators and inverters coupled through lossless lines with
/// weights `aᵢⱼ = |Vᵢ||Vⱼ| Im(Yᵢⱼ)`.
///
/// State layout is `[θ₁…θₙ, θ̇ of each generator in node order]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PowerFile", into = "PowerFile")]
pub struct PowerNetwork {
    graph: WeightedGraph,
    buses: Vec<Bus>,
    generators: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerFile {
    pub graph: WeightedGraph,
    pub buses: Vec<Bus>,
}

impl TryFrom<PowerFile> for PowerNetwork {
    type Error = Error;

    fn try_from(f: PowerFile) -> Result<Self> {
        PowerNetwork::new(f.graph, f.buses)
    }
}

impl From<PowerNetwork> for PowerFile {
    fn from(p: PowerNetwork) -> Self {
        PowerFile { graph: p.graph, buses: p.buses }
    }
}

impl PowerNetwork {
    pub fn new(graph: WeightedGraph, buses: Vec<Bus>) -> Result<Self> {
        if buses.len() != graph.node_count() {
            return Err(Error::invalid(format!(
                "partition covers {} buses but the grid has {} nodes",
                buses.len(),
                graph.node_count()
            )));
        }
        for (i, b) in buses.iter().enumerate() {
            b.validate(i)?;
        }
        let generators = buses
            .iter()
            .enumerate()
            .filter(|(_, b)| matches!(b, Bus::Generator { .. }))
            .map(|(i, _)| i)
            .collect();
        Ok(PowerNetwork { graph, buses, generators })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn len(&self) -> usize {
        self.buses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buses.is_empty()
    }

    /// Indices of generator buses; their velocities follow the phases in
    /// the state vector.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn injections(&self) -> Vec<f64> {
        self.buses.iter().map(Bus::injection).collect()
    }

    /// `ΣPᵢ / ΣDᵢ`, the common frequency of any frequency-synchronized
    /// solution.
    pub fn sync_frequency(&self) -> f64 {
        let p: f64 = self.buses.iter().map(Bus::injection).sum();
        let d: f64 = self.buses.iter().map(Bus::damping).sum();
        p / d
    }

    /// The first-order oscillator model this grid is an analog of, when
    /// every bus has unit damping and no inertia.
    pub fn as_oscillator_network(&self) -> Result<OscillatorNetwork> {
        if !self.generators.is_empty() || self.buses.iter().any(|b| b.damping() != 1.0) {
            return Err(Error::invalid("only first-order unit-damping grids map onto the oscillator model"));
        }
        OscillatorNetwork::new(self.graph.clone(), self.injections())
    }

    /// Initial state with every generator at rest.
    pub fn initial_state(&self, theta: &PhaseState) -> Result<Vec<f64>> {
        if theta.len() != self.len() {
            return Err(Error::invalid("initial phases do not match the grid"));
        }
        let mut s = theta.as_slice().to_vec();
        s.resize(self.dim(), 0.0);
        Ok(s)
    }
}

impl Dynamics for PowerNetwork {
    fn dim(&self) -> usize {
        self.len() + self.generators.len()
    }

    fn phase_count(&self) -> usize {
        self.len()
    }

    fn eval(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        let n = self.len();
        let (theta, vel) = state.split_at(n);
        let (dtheta, dvel) = out.split_at_mut(n);
        coupling_term(&self.graph, theta, dtheta);
        let mut g = 0;
        for (i, bus) in self.buses.iter().enumerate() {
            let flow = dtheta[i];
            match *bus {
                Bus::Generator { power, inertia, damping } => {
                    dtheta[i] = vel[g];
                    dvel[g] = (power - damping * vel[g] - flow) / inertia;
                    g += 1;
                }
                _ => dtheta[i] = (bus.injection() - flow) / bus.damping(),
            }
        }
    }

    fn graph(&self) -> Option<&WeightedGraph> {
        Some(&self.graph)
    }
}

/// Mixed first/second-order grid dynamics. `thetadot` lists generator
/// velocities in node order; the result is `(dθ/dt, d(θ̇_gen)/dt)`.
pub fn power_rhs(net: &PowerNetwork, theta: &PhaseState, thetadot: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if theta.len() != net.len() || thetadot.len() != net.generators.len() {
        return Err(Error::invalid("state sizes do not match the grid partition"));
    }
    let mut state = theta.as_slice().to_vec();
    state.extend_from_slice(thetadot);
    let mut out = vec![0.0; state.len()];
    net.eval(0.0, &state, &mut out);
    let dvel = out.split_off(net.len());
    Ok((out, dvel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::coupled_rhs;

    fn grid() -> PowerNetwork {
        let g = WeightedGraph::ring(4, 2.0).unwrap();
        PowerNetwork::new(
            g,
            vec![
                Bus::Load { demand: 1.0, damping: 1.0 },
                Bus::Inverter { power: 0.6, damping: 1.0 },
                Bus::Load { demand: 0.4, damping: 1.0 },
                Bus::Inverter { power: 0.5, damping: 1.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn partition_checked() {
        let g = WeightedGraph::path(3, 1.0).unwrap();
        assert!(PowerNetwork::new(g.clone(), vec![Bus::Load { demand: 1.0, damping: 1.0 }]).is_err());
        let bad = vec![
            Bus::Load { demand: 1.0, damping: 1.0 },
            Bus::Generator { power: 1.0, inertia: 0.0, damping: 1.0 },
            Bus::Inverter { power: 0.0, damping: 1.0 },
        ];
        assert!(PowerNetwork::new(g, bad).is_err());
        let net = grid();
        let theta = PhaseState::new(vec![0.0; 4]).unwrap();
        assert!(power_rhs(&net, &theta, &[1.0]).is_err());
    }

    #[test]
    fn unit_damping_grid_is_oscillator_model() {
        let net = grid();
        let osc = net.as_oscillator_network().unwrap();
        assert_eq!(osc.omega(), &[-1.0, 0.6, -0.4, 0.5]);
        let theta = PhaseState::new(vec![0.1, 0.9, -0.3, 2.0]).unwrap();
        let (d, dv) = power_rhs(&net, &theta, &[]).unwrap();
        assert!(dv.is_empty());
        assert_eq!(d, coupled_rhs(&osc, &theta).unwrap());
    }

    #[test]
    fn balanced_synchronous_state_is_at_rest() {
        let g = WeightedGraph::complete(3, 1.0).unwrap();
        let net = PowerNetwork::new(
            g,
            vec![
                Bus::Load { demand: 0.0, damping: 1.0 },
                Bus::Generator { power: 0.0, inertia: 2.0, damping: 1.0 },
                Bus::Inverter { power: 0.0, damping: 3.0 },
            ],
        )
        .unwrap();
        let theta = PhaseState::new(vec![0.4; 3]).unwrap();
        let (d, dv) = power_rhs(&net, &theta, &[0.0]).unwrap();
        assert!(d.iter().chain(&dv).all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn sync_frequency_is_power_over_damping() {
        let g = WeightedGraph::complete(3, 1.0).unwrap();
        let net = PowerNetwork::new(
            g,
            vec![
                Bus::Load { demand: 1.0, damping: 2.0 },
                Bus::Inverter { power: 2.0, damping: 1.0 },
                Bus::Inverter { power: 0.5, damping: 0.5 },
            ],
        )
        .unwrap();
        assert!((net.sync_frequency() - 1.5 / 3.5).abs() < 1e-15);
        // Σ Dᵢθ̇ᵢ = Σ Pᵢ for every state; coupling cancels pairwise.
        let theta = PhaseState::new(vec![0.3, 2.0, 5.0]).unwrap();
        let (d, _) = power_rhs(&net, &theta, &[]).unwrap();
        let weighted: f64 = d.iter().zip(net.buses()).map(|(x, b)| x * b.damping()).sum();
        assert!((weighted - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bus_json_schema() {
        let b: Bus = serde_json::from_str(r#"{"kind":"generator","power":1.0,"inertia":2.0,"damping":0.5}"#).unwrap();
        assert_eq!(b, Bus::Generator { power: 1.0, inertia: 2.0, damping: 0.5 });
        assert!(serde_json::from_str::<Bus>(r#"{"kind":"load","demand":1.0}"#).is_err());
    }
}
