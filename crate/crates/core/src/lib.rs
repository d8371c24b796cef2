//! Coupled phase-oscillator networks.
//!
//! The crate simulates the network model
//!
//! ```text
//! dθᵢ/dt = ωᵢ − Σⱼ aᵢⱼ sin(θᵢ − θⱼ)
//! ```
//!
//! together with its application variants (vehicle headings, power grids,
//! clock networks, second-order swing dynamics) and evaluates the analytic
//! synchronization conditions that apply to it: necessary bounds, explicit
//! and implicit critical couplings for the all-to-all Kuramoto model,
//! algebraic-connectivity tests for sparse graphs and Jacobian stability.
//!
//! Module map:
//!
//! - [`torus`]: angles, arcs, order parameter, splay states.
//! - [`netgraph`]: weighted graphs, Laplacians, incidence matrices, spectra.
//! - [`models`]: right-hand sides, energies and Jacobians.
//! - [`integrate`]: fixed-step RK4 with synchronization monitors.
//! - [`conditions`]: analytic conditions and the equilibrium solver.
//! - [`harness`]: experiment configuration, sampling and CSV/JSON output.

pub mod conditions;
pub mod error;
pub mod harness;
pub mod integrate;
pub mod models;
pub mod netgraph;
pub mod torus;

pub use conditions::{ConditionReport, Equilibrium, Stability, Verdict};
pub use error::{Error, Result};
pub use integrate::{IntegratorConfig, SyncVerdict, Trajectory};
pub use models::{OscillatorNetwork, PowerNetwork, SecondOrderNetwork};
pub use netgraph::WeightedGraph;
pub use torus::{Angle, OrderParameter, PhaseState};
