use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Dynamics, OscillatorNetwork};
use crate::error::{Error, Result};
use crate::netgraph::WeightedGraph;
use crate::torus::PhaseState;

/// Odd, 2π-periodic phase-detector characteristic.
pub type CouplingFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Software clocks driven by a phase-locked loop:
///
/// ```text
/// dθᵢ/dt = 2π/Tᵢ + K · Σⱼ aᵢⱼ f(θᵢ − θⱼ)
/// ```
///
/// with convex rows `Σⱼ aᵢⱼ = 1`. The model is stored exactly in this form.
/// With `f = sin` and symmetric weights it is the oscillator network with
/// `ωᵢ = 2π/Tᵢ` and coupling weights `−K·aᵢⱼ`, so synchronizing loops use
/// `K < 0`.
#[derive(Clone)]
pub struct ClockNetwork {
    weights: DMatrix<f64>,
    periods: Vec<f64>,
    gain: f64,
    f: CouplingFn,
}

impl fmt::Debug for ClockNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClockNetwork")
            .field("periods", &self.periods)
            .field("gain", &self.gain)
            .finish()
    }
}

const ODDNESS_GRID: usize = 64;

impl ClockNetwork {
    /// Row weights must be nonnegative and sum to one.
    pub fn new(weights: DMatrix<f64>, periods: Vec<f64>, gain: f64, f: CouplingFn) -> Result<Self> {
        let n = periods.len();
        if weights.nrows() != n || weights.ncols() != n {
            return Err(Error::invalid("weight matrix must be n × n"));
        }
        if periods.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::invalid("clock periods must be positive"));
        }
        for i in 0..n {
            let row = weights.row(i);
            if row.iter().any(|w| *w < 0.0) || weights[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("row {i}: weights must be nonnegative off the diagonal")));
            }
            if (row.sum() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("row {i}: weights sum to {}, not 1", row.sum())));
            }
        }
        check_odd_periodic(&*f)?;
        Ok(ClockNetwork { weights, periods, gain, f })
    }

    /// Row-normalized weights `aᵢⱼ / degᵢ` of an undirected graph. Nodes
    /// without neighbors are rejected.
    pub fn from_graph(graph: &WeightedGraph, periods: Vec<f64>, gain: f64, f: CouplingFn) -> Result<Self> {
        let mut w = graph.adjacency();
        for (i, d) in graph.degrees().into_iter().enumerate() {
            if d == 0.0 {
                return Err(Error::invalid(format!("node {i} has no neighbors; phase detector undefined")));
            }
            w.row_mut(i).scale_mut(1.0 / d);
        }
        Self::new(w, periods, gain, f)
    }

    pub fn sinusoidal(graph: &WeightedGraph, periods: Vec<f64>, gain: f64) -> Result<Self> {
        Self::from_graph(graph, periods, gain, Arc::new(f64::sin))
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn natural_frequencies(&self) -> Vec<f64> {
        self.periods.iter().map(|t| TAU / t).collect()
    }

    /// Equivalent oscillator network, available when the weights are
    /// symmetric and `K < 0`; `f` is assumed to be `sin`.
    pub fn as_oscillator_network(&self) -> Result<OscillatorNetwork> {
        if !(self.gain < 0.0) {
            return Err(Error::invalid("only K < 0 maps to positive oscillator coupling"));
        }
        if (&self.weights - self.weights.transpose()).amax() > 1e-12 {
            return Err(Error::invalid("weights are not symmetric"));
        }
        let n = self.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.weights[(i, j)] > 0.0 {
                    edges.push((i, j, -self.gain * self.weights[(i, j)]));
                }
            }
        }
        OscillatorNetwork::new(WeightedGraph::new(n, &edges)?, self.natural_frequencies())
    }
}

fn check_odd_periodic(f: &dyn Fn(f64) -> f64) -> Result<()> {
    if f(0.0).abs() > 1e-9 {
        return Err(Error::invalid("coupling function must vanish at 0"));
    }
    for k in 1..ODDNESS_GRID {
        let x = -PI + TAU * k as f64 / ODDNESS_GRID as f64 + 0.0123;
        if (f(x) + f(-x)).abs() > 1e-9 {
            return Err(Error::invalid(format!("coupling function is not odd at {x}")));
        }
        if (f(x + TAU) - f(x)).abs() > 1e-9 {
            return Err(Error::invalid(format!("coupling function is not 2π-periodic at {x}")));
        }
    }
    Ok(())
}

impl Dynamics for ClockNetwork {
    fn dim(&self) -> usize {
        self.len()
    }

    fn phase_count(&self) -> usize {
        self.len()
    }

    fn eval(&self, _t: f64, state: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let cvx: f64 = (0..n)
                .filter(|&j| self.weights[(i, j)] != 0.0)
                .map(|j| self.weights[(i, j)] * (self.f)(state[i] - state[j]))
                .sum();
            out[i] = TAU / self.periods[i] + self.gain * cvx;
        }
    }
}

pub fn clock_rhs(net: &ClockNetwork, theta: &PhaseState) -> Result<Vec<f64>> {
    if theta.len() != net.len() {
        return Err(Error::invalid("state does not match the clock network"));
    }
    let mut out = vec![0.0; net.len()];
    net.eval(0.0, theta.as_slice(), &mut out);
    Ok(out)
}
