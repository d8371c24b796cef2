use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Bus, ClockNetwork, Dynamics, OscillatorNetwork, PowerNetwork, SecondOrderNetwork};
use crate::error::{Error, Result};
use crate::netgraph::WeightedGraph;
use crate::torus::PhaseState;

/// A graph given inline or as a path to a graph JSON file (relative paths
/// resolve against the model file's directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Inline(WeightedGraph),
    File(PathBuf),
}

impl GraphSource {
    pub fn resolve(&self, base: Option<&Path>) -> Result<WeightedGraph> {
        match self {
            GraphSource::Inline(g) => Ok(g.clone()),
            GraphSource::File(p) => {
                let path = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                WeightedGraph::load(path)
            }
        }
    }
}

/// Model description file, tagged by `kind`:
///
/// ```json
/// {"kind": "oscillator", "graph": {"n": 2, "edges": [[0, 1, 1.0]]}, "omega": [-1, 1]}
/// {"kind": "kuramoto", "coupling": 3.0, "omega": [-1, 0, 1]}
/// {"kind": "second_order", "graph": "g.json", "omega": [..], "inertia": [..], "damping": [..]}
/// {"kind": "power", "graph": "g.json", "buses": [{"kind": "load", "demand": 1, "damping": 1}, ..]}
/// {"kind": "clock", "graph": "g.json", "periods": [..], "gain": -1.0}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelFile {
    Oscillator {
        graph: GraphSource,
        omega: Vec<f64>,
    },
    Kuramoto {
        coupling: f64,
        omega: Vec<f64>,
    },
    SecondOrder {
        graph: GraphSource,
        omega: Vec<f64>,
        inertia: Vec<f64>,
        damping: Vec<f64>,
    },
    Power {
        graph: GraphSource,
        buses: Vec<Bus>,
    },
    /// Sinusoidal phase detector with row-normalized graph weights.
    Clock {
        graph: GraphSource,
        periods: Vec<f64>,
        gain: f64,
    },
}

impl ModelFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelFile::Oscillator { .. } => "oscillator",
            ModelFile::Kuramoto { .. } => "kuramoto",
            ModelFile::SecondOrder { .. } => "second_order",
            ModelFile::Power { .. } => "power",
            ModelFile::Clock { .. } => "clock",
        }
    }

    /// First-order oscillator network, for the kinds that are one.
    pub fn oscillator_network(&self, base: Option<&Path>) -> Result<OscillatorNetwork> {
        match self {
            ModelFile::Oscillator { graph, omega } => OscillatorNetwork::new(graph.resolve(base)?, omega.clone()),
            ModelFile::Kuramoto { coupling, omega } => OscillatorNetwork::kuramoto(*coupling, omega.clone()),
            other => Err(Error::invalid(format!("model kind '{}' is not a first-order oscillator network", other.kind()))),
        }
    }

    pub fn second_order_network(&self, base: Option<&Path>) -> Result<SecondOrderNetwork> {
        match self {
            ModelFile::SecondOrder { graph, omega, inertia, damping } => {
                SecondOrderNetwork::new(graph.resolve(base)?, omega.clone(), inertia.clone(), damping.clone())
            }
            other => Err(Error::invalid(format!("model kind '{}' is not second order", other.kind()))),
        }
    }

    pub fn power_network(&self, base: Option<&Path>) -> Result<PowerNetwork> {
        match self {
            ModelFile::Power { graph, buses } => PowerNetwork::new(graph.resolve(base)?, buses.clone()),
            other => Err(Error::invalid(format!("model kind '{}' is not a power network", other.kind()))),
        }
    }

    pub fn clock_network(&self, base: Option<&Path>) -> Result<ClockNetwork> {
        match self {
            ModelFile::Clock { graph, periods, gain } => {
                ClockNetwork::sinusoidal(&graph.resolve(base)?, periods.clone(), *gain)
            }
            other => Err(Error::invalid(format!("model kind '{}' is not a clock network", other.kind()))),
        }
    }

    pub fn node_count(&self) -> Result<usize> {
        Ok(match self {
            ModelFile::Oscillator { omega, .. } | ModelFile::Kuramoto { omega, .. } | ModelFile::SecondOrder { omega, .. } => {
                omega.len()
            }
            ModelFile::Power { buses, .. } => buses.len(),
            ModelFile::Clock { periods, .. } => periods.len(),
        })
    }

    /// Build the dynamics and its initial state from phases `theta0`
    /// (all zero when absent). Velocities start at zero.
    pub fn instantiate(
        &self,
        base: Option<&Path>,
        theta0: Option<&PhaseState>,
    ) -> Result<(Box<dyn Dynamics + Send + Sync>, Vec<f64>)> {
        let n = self.node_count()?;
        let theta = match theta0 {
            Some(t) if t.len() != n => {
                return Err(Error::invalid(format!("{} initial phases for {n} oscillators", t.len())));
            }
            Some(t) => t.clone(),
            None => PhaseState::new(vec![0.0; n])?,
        };
        let phases = theta.as_slice().to_vec();
        Ok(match self {
            ModelFile::Oscillator { .. } | ModelFile::Kuramoto { .. } => (Box::new(self.oscillator_network(base)?), phases),
            ModelFile::SecondOrder { .. } => {
                let mut state = phases;
                state.resize(2 * n, 0.0);
                (Box::new(self.second_order_network(base)?), state)
            }
            ModelFile::Power { .. } => {
                let net = self.power_network(base)?;
                let state = net.initial_state(&theta)?;
                (Box::new(net), state)
            }
            ModelFile::Clock { .. } => (Box::new(self.clock_network(base)?), phases),
        })
    }
}
