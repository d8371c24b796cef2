use std::fmt;
use std::sync::Arc;

use super::Dynamics;
use crate::error::{Error, Result};
use crate::netgraph::{Edge, WeightedGraph};
use crate::torus::PhaseState;

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type EdgeWeightFn = Arc<dyn Fn(f64, &Edge) -> f64 + Send + Sync>;

/// Unit-speed planar particles steered by relative headings:
///
/// ```text
/// dr/dt = e^{iθ},   dθᵢ/dt = ω₀(t) − K Σⱼ aᵢⱼ(t) sin(θᵢ − θⱼ)
/// ```
///
/// State layout is `[θ₁…θₙ, x₁…xₙ, y₁…yₙ]`.
#[derive(Clone)]
pub struct VehicleSwarm {
    pub graph: WeightedGraph,
    pub gain: f64,
    pub omega0: TimeFn,
    /// Time-varying edge weights; `None` keeps the graph weights.
    pub weights: Option<EdgeWeightFn>,
    pub positions: Vec<(f64, f64)>,
    pub headings: PhaseState,
}

impl fmt::Debug for VehicleSwarm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VehicleSwarm")
            .field("n", &self.headings.len())
            .field("gain", &self.gain)
            .field("time_varying_weights", &self.weights.is_some())
            .finish()
    }
}

impl VehicleSwarm {
    /// Constant turning rate `omega0` and static weights.
    pub fn new(
        graph: WeightedGraph,
        gain: f64,
        omega0: f64,
        positions: Vec<(f64, f64)>,
        headings: PhaseState,
    ) -> Result<Self> {
        if positions.len() != headings.len() || graph.node_count() != headings.len() {
            return Err(Error::invalid("positions, headings and graph must agree on n"));
        }
        Ok(VehicleSwarm {
            graph,
            gain,
            omega0: Arc::new(move |_| omega0),
            weights: None,
            positions,
            headings,
        })
    }

    pub fn with_omega0(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.omega0 = Arc::new(f);
        self
    }

    pub fn with_weights(mut self, f: impl Fn(f64, &Edge) -> f64 + Send + Sync + 'static) -> Self {
        self.weights = Some(Arc::new(f));
        self
    }

    pub fn len(&self) -> usize {
        self.headings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headings.is_empty()
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let mut s = self.headings.as_slice().to_vec();
        s.extend(self.positions.iter().map(|p| p.0));
        s.extend(self.positions.iter().map(|p| p.1));
        s
    }
}

impl Dynamics for VehicleSwarm {
    fn dim(&self) -> usize {
        3 * self.len()
    }

    fn phase_count(&self) -> usize {
        self.len()
    }

    fn eval(&self, t: f64, state: &[f64], out: &mut [f64]) {
        let n = self.len();
        let theta = &state[..n];
        let (dtheta, dpos) = out.split_at_mut(n);
        dtheta.iter_mut().for_each(|x| *x = 0.0);
        for e in self.graph.edges() {
            let w = self.weights.as_ref().map_or(e.weight, |f| f(t, e));
            let flow = w * (theta[e.source] - theta[e.sink]).sin();
            dtheta[e.source] += flow;
            dtheta[e.sink] -= flow;
        }
        let w0 = (self.omega0)(t);
        for (i, d) in dtheta.iter_mut().enumerate() {
            *d = w0 - self.gain * *d;
            dpos[i] = theta[i].cos();
            dpos[n + i] = theta[i].sin();
        }
    }

    fn graph(&self) -> Option<&WeightedGraph> {
        Some(&self.graph)
    }
}

/// Position and heading derivatives at time `t` for the given state.
pub fn vehicle_rhs(swarm: &VehicleSwarm, t: f64, state: &[f64]) -> Result<Vec<f64>> {
    if state.len() != swarm.dim() {
        return Err(Error::invalid("state length must be 3n"));
    }
    let mut out = vec![0.0; state.len()];
    swarm.eval(t, state, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, IntegratorConfig};
    use std::f64::consts::TAU;

    fn swarm(gain: f64, omega0: f64) -> VehicleSwarm {
        let n = 3;
        let g = WeightedGraph::complete(n, 1.0).unwrap();
        let headings = PhaseState::new(vec![0.0, 2.0, 4.0]).unwrap();
        VehicleSwarm::new(g, gain, omega0, vec![(0.0, 0.0); n], headings).unwrap()
    }

    #[test]
    fn uncoupled_particles_circle() {
        let s = swarm(0.0, 0.5);
        let cfg = IntegratorConfig::new(1e-3, TAU / 0.5, 100).unwrap();
        let traj = integrate(&s, &s.initial_state(), &cfg).unwrap();
        let n = s.len();
        // circles of radius 1/|ω₀| through the origin
        let last = traj.extras.last().unwrap();
        let t = traj.final_time();
        for i in 0..n {
            let th0 = s.headings.as_slice()[i];
            let x = ((th0 + 0.5 * t).sin() - th0.sin()) / 0.5;
            let y = (th0.cos() - (th0 + 0.5 * t).cos()) / 0.5;
            assert!((last[i] - x).abs() < 1e-9 && (last[n + i] - y).abs() < 1e-9);
            let max_dist = traj
                .extras
                .iter()
                .map(|p| p[i].hypot(p[n + i]))
                .fold(0.0, f64::max);
            assert!((max_dist - 2.0 / 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn zero_rate_moves_straight() {
        let s = swarm(0.0, 0.0);
        let cfg = IntegratorConfig::new(1e-2, 3.0, 1).unwrap();
        let traj = integrate(&s, &s.initial_state(), &cfg).unwrap();
        let last = traj.extras.last().unwrap();
        for i in 0..3 {
            let h = s.headings.as_slice()[i];
            assert!((last[i] - 3.0 * h.cos()).abs() < 1e-10);
            assert!((last[3 + i] - 3.0 * h.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn synchronized_headings_translate_rigidly() {
        let g = WeightedGraph::complete(3, 1.0).unwrap();
        let headings = PhaseState::new(vec![0.7; 3]).unwrap();
        let pos = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)];
        let s = VehicleSwarm::new(g, 1.0, 0.0, pos.clone(), headings).unwrap();
        let d = vehicle_rhs(&s, 0.0, &s.initial_state()).unwrap();
        assert!(d[..3].iter().all(|x| *x == 0.0));
        assert!(d[3..6].iter().all(|x| *x == 0.7f64.cos()));
        assert!(d[6..].iter().all(|x| *x == 0.7f64.sin()));
    }

    #[test]
    fn time_varying_ingredients() {
        let s = swarm(1.0, 0.0)
            .with_omega0(|t| 2.0 * t)
            .with_weights(|_, _| 0.0);
        let d = vehicle_rhs(&s, 1.5, &s.initial_state()).unwrap();
        assert!(d[..3].iter().all(|x| *x == 3.0));
        assert!(vehicle_rhs(&s, 0.0, &[0.0; 4]).is_err());
    }
}
