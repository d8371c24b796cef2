//! Geometry on the circle and the n-torus.
//!
//! Angles are always stored wrapped to `[0, 2π)`; signed differences are
//! computed on demand with [`angular_difference`].

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::WeightedGraph;

/// Below this magnitude the centroid phase ψ is reported as undefined.
pub const PSI_TOLERANCE: f64 = 1e-9;

/// A point on the unit circle, in radians within `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(x: f64) -> Result<Self> {
        wrap_angle(x)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Rotate counter-clockwise by `s` radians.
    pub fn rotate(self, s: f64) -> Self {
        Angle(wrap_unchecked(self.0 + s))
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        wrap_angle(x)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

#[inline]
pub(crate) fn wrap_unchecked(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Reduce a finite real number modulo 2π into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> Result<Angle> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("angle must be finite, got {x}")));
    }
    Ok(Angle(wrap_unchecked(x)))
}

/// Shorter of the clockwise and counter-clockwise arc lengths, in `[0, π]`.
pub fn geodesic_distance(a: Angle, b: Angle) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(TAU - d)
}

/// Signed difference `b − a` on the circle, in `(−π, π]`.
///
/// Positive iff the counter-clockwise path from `a` to `b` is the shorter
/// one. Antipodal points return `+π`.
pub fn angular_difference(a: Angle, b: Angle) -> f64 {
    signed_difference(a.0, b.0)
}

#[inline]
pub(crate) fn signed_difference(from: f64, to: f64) -> f64 {
    let d = wrap_unchecked(to - from);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Ordered array of angles `(θ₁, …, θₙ)`, a point on the n-torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhaseState {
    angles: Vec<f64>,
}

impl PhaseState {
    /// Wraps every entry; rejects empty or non-finite input.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::invalid("phase state needs at least one angle"));
        }
        let mut angles = angles;
        for x in angles.iter_mut() {
            *x = wrap_angle(*x)?.0;
        }
        Ok(PhaseState { angles })
    }

    pub fn from_angles(angles: &[Angle]) -> Result<Self> {
        Self::new(angles.iter().map(|a| a.0).collect())
    }

    /// All oscillators at the same phase.
    pub fn synchronized(n: usize, phase: f64) -> Result<Self> {
        Self::new(vec![phase; n])
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn angle(&self, i: usize) -> Angle {
        Angle(self.angles[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = Angle> + '_ {
        self.angles.iter().map(|&x| Angle(x))
    }

    /// `rot_s(θ)`: common counter-clockwise rotation by `s`.
    pub fn rotated(&self, s: f64) -> Self {
        PhaseState {
            angles: self.angles.iter().map(|&x| wrap_unchecked(x + s)).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for PhaseState {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        PhaseState::new(v)
    }
}

impl From<PhaseState> for Vec<f64> {
    fn from(p: PhaseState) -> Vec<f64> {
        p.angles
    }
}

/// Complex centroid `r·e^{iψ}` of the phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameter {
    pub r: f64,
    /// `None` when `r ≤ PSI_TOLERANCE`.
    pub psi: Option<Angle>,
}

pub fn order_parameter(theta: &PhaseState) -> OrderParameter {
    order_parameter_raw(theta.as_slice())
}

pub(crate) fn order_parameter_raw(theta: &[f64]) -> OrderParameter {
    let n = theta.len() as f64;
    let (s, c) = theta
        .iter()
        .fold((0.0, 0.0), |(s, c), &x| (s + x.sin(), c + x.cos()));
    let (s, c) = (s / n, c / n);
    let r = s.hypot(c).min(1.0);
    let psi = (r > PSI_TOLERANCE).then(|| Angle(wrap_unchecked(s.atan2(c))));
    OrderParameter { r, psi }
}

/// Sorted angles and the index (into the sorted list) of the angle that
/// starts the shortest containing arc, along with the largest gap.
fn largest_gap(theta: &[f64]) -> (Vec<f64>, usize, f64) {
    let mut sorted = theta.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    // gap ending at sorted[k], measured counter-clockwise from its predecessor
    let mut best = (0, sorted[0] + TAU - sorted[n - 1]);
    for k in 1..n {
        let gap = sorted[k] - sorted[k - 1];
        if gap > best.1 {
            best = (k, gap);
        }
    }
    (sorted, best.0, best.1)
}

/// Length of the shortest arc containing every angle, in `[0, 2π)`.
pub fn shortest_arc_length(theta: &PhaseState) -> f64 {
    arc_length_raw(theta.as_slice())
}

pub(crate) fn arc_length_raw(theta: &[f64]) -> f64 {
    if theta.len() == 1 {
        return 0.0;
    }
    let (_, _, gap) = largest_gap(theta);
    (TAU - gap).max(0.0)
}

/// Membership in the closed arc set: every angle lies in some arc of
/// length `gamma`.
pub fn in_arc_set(theta: &PhaseState, gamma: f64) -> bool {
    shortest_arc_length(theta) <= gamma
}

/// Angles unwrapped along the shortest containing arc, starting at 0.
///
/// Returns the arc start angle and the offsets of each oscillator (in input
/// order) measured counter-clockwise from it.
pub(crate) fn unwrap_in_arc(theta: &[f64]) -> (f64, Vec<f64>) {
    if theta.len() == 1 {
        return (theta[0], vec![0.0]);
    }
    let (sorted, start, _) = largest_gap(theta);
    let origin = sorted[start];
    let offsets = theta.iter().map(|&x| wrap_unchecked(x - origin)).collect();
    (origin, offsets)
}

/// Largest geodesic distance across the edges of `graph`.
pub fn max_edge_distance(theta: &PhaseState, graph: &WeightedGraph) -> Result<f64> {
    if graph.node_count() != theta.len() {
        return Err(Error::invalid(format!(
            "graph has {} nodes but state has {} angles",
            graph.node_count(),
            theta.len()
        )));
    }
    Ok(max_edge_distance_raw(theta.as_slice(), graph))
}

pub(crate) fn max_edge_distance_raw(theta: &[f64], graph: &WeightedGraph) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| geodesic_distance(Angle(theta[e.source]), Angle(theta[e.sink])))
        .fold(0.0, f64::max)
}

/// Lower bounds relating arc length and order parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcOrderBounds {
    /// `cos(γ(θ)/2)`, a lower bound on `r(θ)` when `γ(θ) ≤ π`.
    pub r_lower: f64,
    pub r_lower_valid: bool,
    /// `2·arccos(r(θ))`, a lower bound on `γ(θ)` when θ fits in a closed
    /// half circle.
    pub gamma_lower: f64,
    pub gamma_lower_valid: bool,
}

pub fn lemma1_bounds(theta: &PhaseState) -> Result<ArcOrderBounds> {
    if theta.len() < 2 {
        return Err(Error::invalid("arc/order bounds need n >= 2"));
    }
    let gamma = shortest_arc_length(theta);
    let r = order_parameter(theta).r;
    let in_half = gamma <= PI;
    Ok(ArcOrderBounds {
        r_lower: (gamma / 2.0).cos(),
        r_lower_valid: in_half,
        gamma_lower: 2.0 * r.clamp(-1.0, 1.0).acos(),
        gamma_lower_valid: in_half,
    })
}

/// `θᵢ = i·2π/n + φ` for `i = 1..n`.
pub fn splay_state(n: usize, phi: Angle) -> Result<PhaseState> {
    if n < 2 {
        return Err(Error::invalid("splay state needs n >= 2"));
    }
    let step = TAU / n as f64;
    PhaseState::new((1..=n).map(|i| i as f64 * step + phi.0).collect())
}

pub fn is_balanced(theta: &PhaseState, tol: f64) -> bool {
    order_parameter(theta).r <= tol
}

/// Fixed representative of the rotation class `[θ]`.
///
/// When the phases fit in an open half circle the result has zero mean in
/// the unwrapped chart of the containing arc; otherwise it is rotated so
/// that `θ₁ = 0`.
pub fn canonical_representative(theta: &PhaseState) -> PhaseState {
    let raw = theta.as_slice();
    let gamma = arc_length_raw(raw);
    let shift = if gamma < PI {
        let (origin, offsets) = unwrap_in_arc(raw);
        let mean = offsets.iter().sum::<f64>() / offsets.len() as f64;
        -(origin + mean)
    } else {
        -raw[0]
    };
    theta.rotated(shift)
}

/// Largest per-component geodesic distance between two states.
pub fn state_distance(a: &PhaseState, b: &PhaseState) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| geodesic_distance(x, y))
        .fold(0.0, f64::max)
}
