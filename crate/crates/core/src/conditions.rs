//! Analytic synchronization conditions.
//!
//! All checkers work in the frame rotating with the mean natural frequency:
//! ω is shifted to zero mean internally and the shift is recorded in the
//! report.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{jacobian_raw, OscillatorNetwork};
use crate::netgraph::{laplacian_pseudoinverse, weighted_laplacian, SpectralSummary, WeightedGraph, CONNECTIVITY_TOL};
use crate::torus::{self, PhaseState};

/// Eigenvalues above `−STABILITY_TOL` (other than the rotational zero mode)
/// count as non-stable.
pub const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

/// Outcome of one analytic condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub threshold: f64,
    pub actual: f64,
    pub verdict: Verdict,
    /// The actual value sits exactly on a strict threshold.
    pub boundary: bool,
    /// Mean natural frequency removed before evaluation.
    pub omega_shift: f64,
    /// γ_min, γ_max, rates and similar; present only when satisfied.
    pub derived: BTreeMap<String, f64>,
}

impl ConditionReport {
    fn new(name: &str, threshold: f64, actual: f64, satisfied: bool, omega_shift: f64) -> Self {
        ConditionReport {
            name: name.to_string(),
            threshold,
            actual,
            verdict: if satisfied { Verdict::Satisfied } else { Verdict::Violated },
            boundary: actual == threshold,
            omega_shift,
            derived: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        if self.verdict == Verdict::Satisfied {
            self.derived.insert(key.to_string(), value);
        }
        self
    }

    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.derived.get(key).copied()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&gamma) {
        return Err(Error::invalid(format!("γ = {gamma} outside [0, π/2]")));
    }
    Ok(())
}

/// Necessary condition `degᵢ·sin γ ≥ |ωᵢ|` for every node.
///
/// `actual` is the smallest margin `degᵢ sin γ − |ωᵢ|`; threshold 0.
pub fn necessary_absolute(net: &OscillatorNetwork, gamma: f64) -> Result<ConditionReport> {
    check_gamma(gamma)?;
    let (net, shift) = net.centered();
    let s = gamma.sin();
    let margin = net
        .graph()
        .degrees()
        .iter()
        .zip(net.omega())
        .map(|(d, w)| d * s - w.abs())
        .fold(f64::INFINITY, f64::min);
    let margin = snap(margin);
    Ok(ConditionReport::new("necessary_absolute", 0.0, margin, margin >= 0.0, shift))
}

/// Necessary condition `(degᵢ + degⱼ)·sin γ ≥ |ωᵢ − ωⱼ|` for all pairs.
pub fn necessary_incremental(net: &OscillatorNetwork, gamma: f64) -> Result<ConditionReport> {
    check_gamma(gamma)?;
    let (net, shift) = net.centered();
    let s = gamma.sin();
    let deg = net.graph().degrees();
    let w = net.omega();
    let mut margin = f64::INFINITY;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            margin = margin.min((deg[i] + deg[j]) * s - (w[i] - w[j]).abs());
        }
    }
    let margin = snap(margin);
    Ok(ConditionReport::new("necessary_incremental", 0.0, margin, margin >= 0.0, shift))
}

/// Rounding noise from the mean shift is snapped to an exact zero margin.
fn snap(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

fn width(omega: &[f64]) -> f64 {
    let (lo, hi) = omega
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| (lo.min(w), hi.max(w)));
    hi - lo
}

/// Sufficient (and worst-case exact) Kuramoto coupling `ω_max − ω_min`.
pub fn kuramoto_explicit_kc(omega: &[f64]) -> Result<f64> {
    if omega.len() < 2 {
        return Err(Error::invalid("need at least two oscillators"));
    }
    Ok(width(omega))
}

/// `(γ_min, γ_max)` with `sin γ_min = sin γ_max = K_c/K`.
pub fn kuramoto_gamma_bounds(k: f64, omega: &[f64]) -> Result<(f64, f64)> {
    let kc = kuramoto_explicit_kc(omega)?;
    if !(k > kc) {
        return Err(Error::ConditionViolated(format!("K = {k} does not exceed K_critical = {kc}")));
    }
    let gmin = (kc / k).asin();
    Ok((gmin, PI - gmin))
}

/// Lower bound on the asymptotic order parameter,
/// `√((1 + √(1 − (K_c/K)²))/2) = cos(γ_min/2)`.
pub fn kuramoto_order_bound(k: f64, omega: &[f64]) -> Result<f64> {
    let kc = kuramoto_explicit_kc(omega)?;
    if !(k > kc) {
        return Err(Error::ConditionViolated(format!("K = {k} does not exceed K_critical = {kc}")));
    }
    let q = kc / k;
    Ok(((1.0 + (1.0 - q * q).sqrt()) / 2.0).sqrt())
}

/// Necessary Kuramoto coupling `n/(2(n−1))·(ω_max − ω_min)`.
pub fn kuramoto_necessary_bound(omega: &[f64]) -> Result<f64> {
    let w = kuramoto_explicit_kc(omega)?;
    let n = omega.len() as f64;
    Ok(n / (2.0 * (n - 1.0)) * w)
}

/// Kuramoto synchronization test `K > ω_max − ω_min` with the phase-cohesion
/// bounds, order-parameter bound and the exact and necessary couplings.
pub fn kuramoto_check(k: f64, omega: &[f64]) -> Result<ConditionReport> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::invalid(format!("coupling K = {k} must be finite and nonnegative")));
    }
    let kc = kuramoto_explicit_kc(omega)?;
    let mean = omega.iter().sum::<f64>() / omega.len() as f64;
    let report = ConditionReport::new("kuramoto_explicit", kc, k, k > kc, mean);
    if !report.is_satisfied() {
        return Ok(report);
    }
    let (gmin, gmax) = kuramoto_gamma_bounds(k, omega)?;
    Ok(report
        .with("gamma_min", gmin)
        .with("gamma_max", gmax)
        .with("order_bound", kuramoto_order_bound(k, omega)?)
        .with("implicit_kc", verwoerd_mason_kc(omega)?.kc)
        .with("necessary_bound", kuramoto_necessary_bound(omega)?))
}

/// Root of the implicit consistency equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitCoupling {
    pub kc: f64,
    pub u_star: f64,
    /// `h(u*)` at the returned root.
    pub residual: f64,
    /// All sign changes found when scanning the bracket, if more than one.
    pub alternative_roots: Vec<f64>,
}

impl ImplicitCoupling {
    pub fn is_ambiguous(&self) -> bool {
        !self.alternative_roots.is_empty()
    }
}

/// `√(1 − (Ωᵢ/u)²)` for all i, evaluated as `√((1−x)(1+x))`.
fn root_terms(centered: &[f64], u: f64) -> impl Iterator<Item = f64> + '_ {
    centered.iter().map(move |&w| {
        let x = (w / u).abs();
        ((1.0 - x) * (1.0 + x)).max(f64::MIN_POSITIVE).sqrt()
    })
}

/// `h(u) = 2Σ√(1−(Ωᵢ/u)²) − Σ1/√(1−(Ωᵢ/u)²)`.
fn implicit_residual(centered: &[f64], u: f64) -> f64 {
    root_terms(centered, u).map(|s| 2.0 * s - 1.0 / s).sum()
}

const SCAN_POINTS: usize = 32;

/// Exact critical coupling of the all-to-all Kuramoto model from the
/// implicit equations
///
/// ```text
/// 2 Σ √(1 − (Ωᵢ/u)²) = Σ 1/√(1 − (Ωᵢ/u)²),   K_c = n·u* / Σ √(1 − (Ωᵢ/u*)²)
/// ```
///
/// with `Ωᵢ = ωᵢ − mean(ω)` and `u* ∈ [‖Ω‖∞, 2‖Ω‖∞]`, solved by bisection.
pub fn verwoerd_mason_kc(omega: &[f64]) -> Result<ImplicitCoupling> {
    let n = omega.len();
    if n < 2 {
        return Err(Error::invalid("need at least two oscillators"));
    }
    let mean = omega.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = omega.iter().map(|w| w - mean).collect();
    let inf_norm = centered.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if inf_norm == 0.0 || width(omega) <= 1e-14 * omega.iter().fold(0.0f64, |m, w| m.max(w.abs())) {
        return Err(Error::Degenerate("all natural frequencies are equal".into()));
    }
    let h = |u: f64| implicit_residual(&centered, u);

    // The residual diverges to −∞ at the left end, approached as a limit.
    let left = inf_norm * (1.0 + 1e-14);
    let right = 2.0 * inf_norm;
    let (h_left, h_right) = (h(left), h(right));
    if !(h_left < 0.0 && h_right > 0.0) {
        return Err(Error::Solver(format!(
            "no sign change on [{left:.6e}, {right:.6e}]: h = ({h_left:.3e}, {h_right:.3e})"
        )));
    }

    let mut brackets = Vec::new();
    let mut prev = (left, h_left);
    for k in 1..=SCAN_POINTS {
        let u = left + (right - left) * k as f64 / SCAN_POINTS as f64;
        let hu = if k == SCAN_POINTS { h_right } else { h(u) };
        if (prev.1 < 0.0) != (hu < 0.0) {
            brackets.push((prev.0, u));
        }
        prev = (u, hu);
    }
    let roots: Vec<f64> = brackets.iter().map(|&(a, b)| bisect(&h, a, b)).collect();
    let u_star = roots[0];
    let alternative_roots = if roots.len() > 1 { roots[1..].to_vec() } else { Vec::new() };
    let sum_roots: f64 = root_terms(&centered, u_star).sum();
    Ok(ImplicitCoupling {
        kc: n as f64 * u_star / sum_roots,
        u_star,
        residual: h(u_star),
        alternative_roots,
    })
}

/// Bisection down to adjacent floating-point numbers; returns the endpoint
/// with the smaller residual. `h(a) < 0 ≤ h(b)` or the reverse.
fn bisect(h: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let neg_left = h(a) < 0.0;
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (h(mid) < 0.0) == neg_left {
            a = mid;
        } else {
            b = mid;
        }
    }
    if h(a).abs() <= h(b).abs() {
        a
    } else {
        b
    }
}

/// Critical coupling of the continuum limit, `2/(π·g(0))`.
pub fn continuum_kc(g0: f64) -> Result<f64> {
    if !(g0 > 0.0) {
        return Err(Error::invalid(format!("density at zero must be positive, got {g0}")));
    }
    Ok(2.0 / (PI * g0))
}

fn require_connected(g: &WeightedGraph) -> Result<()> {
    if !g.is_connected() {
        return Err(Error::invalid("condition requires a connected graph"));
    }
    Ok(())
}

/// `sinc(x) = sin(x)/x`, `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// γ_max ∈ (π/2, π] solving `(π/2)·sinc(γ) = ratio` for `ratio ∈ [0, 1)`.
fn gamma_max_sinc(ratio: f64) -> f64 {
    let f = |g: f64| FRAC_PI_2 * sinc(g) - ratio;
    if f(PI) >= 0.0 {
        return PI;
    }
    // f(π/2) = 1 − ratio > 0 and f(π) = −ratio < 0; f decreasing in between
    let (mut a, mut b) = (FRAC_PI_2, PI);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

/// `‖B_cᵀω‖₂`: root of the sum of squared pairwise differences.
pub fn complete_difference_norm(omega: &[f64]) -> f64 {
    // Σ_{i<j} (ωᵢ − ωⱼ)² = n Σ (ωᵢ − ω̄)²
    (omega.len() as f64 * crate::integrate::centered_sq_norm(omega)).sqrt()
}

/// `‖Bᵀω‖₂` over the edges of `g` (unweighted incidence).
pub fn edge_difference_norm(g: &WeightedGraph, omega: &[f64]) -> f64 {
    g.edge_differences(omega).iter().map(|d| d * d).sum::<f64>().sqrt()
}

/// Algebraic-connectivity condition `λ₂(L) > ‖B_cᵀω‖₂` for synchronization
/// on arbitrary connected graphs.
///
/// When satisfied, reports `gamma_min = arcsin(λ_c/λ₂)` and `gamma_max`
/// from `(π/2)·sinc(γ_max) = λ_c/λ₂`; with `rate_gamma < π/2` it also
/// reports the frequency-synchronization rate `λ₂·cos(rate_gamma)`.
pub fn theorem4_check(net: &OscillatorNetwork, rate_gamma: Option<f64>) -> Result<ConditionReport> {
    require_connected(net.graph())?;
    let (centered, shift) = net.centered();
    let lambda_c = complete_difference_norm(centered.omega());
    let lambda2 = net.graph().algebraic_connectivity();
    let ok = lambda2 > lambda_c;
    let ratio = lambda_c / lambda2;
    let mut report = ConditionReport::new("theorem4_connectivity", lambda_c, lambda2, ok, shift)
        .with("lambda_critical", lambda_c)
        .with("lambda2", lambda2);
    if ok {
        report = report.with("gamma_min", ratio.asin()).with("gamma_max", gamma_max_sinc(ratio));
        if let Some(g) = rate_gamma.filter(|g| *g < FRAC_PI_2) {
            report = report.with("sync_rate", lambda2 * g.cos());
        }
    }
    Ok(report)
}

/// Sharper local condition `λ₂(L) > ‖Bᵀω‖₂` with the graph's own incidence
/// matrix; guarantees a stable equilibrium with `‖Bᵀθ‖₂ ≤ γ_min`.
pub fn theorem5_check(net: &OscillatorNetwork) -> Result<ConditionReport> {
    require_connected(net.graph())?;
    let (centered, shift) = net.centered();
    let threshold = edge_difference_norm(net.graph(), centered.omega());
    let lambda2 = net.graph().algebraic_connectivity();
    let ok = lambda2 > threshold;
    Ok(ConditionReport::new("theorem5_connectivity", threshold, lambda2, ok, shift)
        .with("gamma_min", (threshold / lambda2).min(1.0).asin())
        .with("lambda2", lambda2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    /// Locally exponentially stable synchronization manifold.
    Stable,
    /// Some non-structural Jacobian eigenvalue is not negative.
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Canonical representative of the equilibrium class.
    pub theta: PhaseState,
    /// Edge differences `Bᵀθ` in the solver's unwrapped coordinates.
    pub edge_differences: Vec<f64>,
    /// `‖ω − L(Bᵀθ)·θ‖₂` with zero-mean ω.
    pub residual: f64,
    pub iterations: usize,
    pub stability: Stability,
    /// Whether every edge difference is below π/2.
    pub in_cohesive_set: bool,
}

pub const EQUILIBRIUM_TOL: f64 = 1e-10;
pub const EQUILIBRIUM_MAX_ITER: usize = 10_000;

/// Damped fixed-point iteration `θ ← (1−α)θ + α·L(Bᵀθ)†ω` where
/// `L(x) = B·diag(aᵢⱼ sinc(xₑ))·Bᵀ`, started at θ = 0.
///
/// ω is shifted to zero mean first. Non-convergence is inconclusive: it
/// does not prove that no equilibrium exists.
pub fn solve_equilibrium(net: &OscillatorNetwork, damping: f64) -> Result<Equilibrium> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::invalid(format!("damping must lie in (0, 1], got {damping}")));
    }
    let g = net.graph();
    require_connected(g)?;
    let (centered, _) = net.centered();
    let omega = DVector::from_column_slice(centered.omega());
    let n = net.len();
    let mut theta = DVector::zeros(n);
    let mut coupling = vec![0.0; n];

    let residual_of = |theta: &DVector<f64>, buf: &mut Vec<f64>| {
        crate::models::coupling_term(g, theta.as_slice(), buf);
        omega.iter().zip(buf.iter()).map(|(w, c)| (w - c).powi(2)).sum::<f64>().sqrt()
    };

    let mut residual = residual_of(&theta, &mut coupling);
    let mut iterations = 0;
    while residual >= EQUILIBRIUM_TOL {
        if iterations >= EQUILIBRIUM_MAX_ITER {
            return Err(Error::NoEquilibrium { iterations, residual });
        }
        let lap = weighted_laplacian(n, g.edges(), |e| {
            e.weight * sinc(theta[e.sink] - theta[e.source])
        });
        let pinv = match laplacian_pseudoinverse(&lap) {
            Ok(p) => p,
            // some sinc weights vanished; the map is undefined here
            Err(_) => return Err(Error::NoEquilibrium { iterations, residual }),
        };
        let target = pinv * &omega;
        theta = theta.scale(1.0 - damping) + target.scale(damping);
        iterations += 1;
        residual = residual_of(&theta, &mut coupling);
        if !residual.is_finite() {
            return Err(Error::NoEquilibrium { iterations, residual });
        }
    }

    let edge_differences = g.edge_differences(theta.as_slice());
    let state = PhaseState::new(theta.as_slice().to_vec())?;
    let in_cohesive_set = edge_differences.iter().all(|d| d.abs() < FRAC_PI_2);
    let stable = in_cohesive_set && second_largest_eigenvalue(&jacobian_raw(g, theta.as_slice())) < -STABILITY_TOL;
    Ok(Equilibrium {
        theta: torus::canonical_representative(&state),
        edge_differences,
        residual,
        iterations,
        stability: if stable { Stability::Stable } else { Stability::Unstable },
        in_cohesive_set,
    })
}

fn second_largest_eigenvalue(j: &DMatrix<f64>) -> f64 {
    let eig = SpectralSummary::of(j);
    let n = eig.eigenvalues.len();
    if n < 2 {
        return f64::NEG_INFINITY;
    }
    eig.eigenvalues[n - 2]
}

/// Local stability of a (near-)equilibrium.
///
/// States with every edge distance below π/2 are stable outright; others
/// are classified by the Jacobian spectrum with the rotational zero mode
/// removed.
pub fn classify_equilibrium(net: &OscillatorNetwork, theta: &PhaseState) -> Result<Stability> {
    const NEAR: f64 = 1e-6;
    let rhs = crate::models::coupled_rhs(net, theta)?;
    let mean = net.mean_frequency();
    let off = rhs.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
    if off > NEAR {
        return Err(Error::invalid(format!("state is not an equilibrium (frequency deviation {off:.3e})")));
    }
    let in_cohesive = torus::max_edge_distance(theta, net.graph())? < FRAC_PI_2;
    if in_cohesive && net.graph().is_connected() {
        return Ok(Stability::Stable);
    }
    let j = jacobian_raw(net.graph(), theta.as_slice());
    Ok(if second_largest_eigenvalue(&j) < -STABILITY_TOL {
        Stability::Stable
    } else {
        Stability::Unstable
    })
}

/// Frequency of any frequency-synchronized solution: the mean of ω.
pub fn sync_frequency(omega: &[f64]) -> Result<f64> {
    if omega.is_empty() {
        return Err(Error::invalid("need at least one oscillator"));
    }
    Ok(omega.iter().sum::<f64>() / omega.len() as f64)
}

/// Smallest eigenvalue magnitude regarded as nonzero by the spectral checks.
pub fn connectivity_tolerance() -> f64 {
    CONNECTIVITY_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_6;

    fn pair(a: f64, omega: [f64; 2]) -> OscillatorNetwork {
        OscillatorNetwork::new(WeightedGraph::new(2, &[(0, 1, a)]).unwrap(), omega.to_vec()).unwrap()
    }

    #[test]
    fn kuramoto_check_report() {
        let omega = [-1.0, 0.0, 1.0];
        let r = kuramoto_check(4.0, &omega).unwrap();
        assert!(r.is_satisfied());
        assert_eq!((r.threshold, r.actual), (2.0, 4.0));
        assert!((r.get("gamma_min").unwrap() - FRAC_PI_6).abs() < 1e-15);
        assert!((r.get("gamma_max").unwrap() - 5.0 * FRAC_PI_6).abs() < 1e-15);
        assert!(r.get("implicit_kc").unwrap() <= 2.0 + 1e-12);
        assert!((r.get("necessary_bound").unwrap() - 1.5).abs() < 1e-15);
        let low = kuramoto_check(2.0, &omega).unwrap();
        assert_eq!(low.verdict, Verdict::Violated);
        assert!(low.derived.is_empty());
        assert!(kuramoto_check(-1.0, &omega).is_err());
    }

    #[test]
    fn necessary_examples() {
        let net = OscillatorNetwork::new(WeightedGraph::path(3, 1.0).unwrap(), vec![2.0, 0.0, -2.0]).unwrap();
        let r = necessary_absolute(&net, FRAC_PI_2).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.derived.is_empty());

        let zero = OscillatorNetwork::new(WeightedGraph::path(3, 0.1).unwrap(), vec![0.0; 3]).unwrap();
        for g in [0.0, 0.3, FRAC_PI_2] {
            assert!(necessary_absolute(&zero, g).unwrap().is_satisfied());
            assert!(necessary_incremental(&zero, g).unwrap().is_satisfied());
        }

        let r = necessary_absolute(&pair(1.0, [-1.0, 1.0]), FRAC_PI_2).unwrap();
        assert!(r.is_satisfied() && r.boundary);
        let r = necessary_incremental(&pair(1.0, [-1.0, 1.0]), FRAC_PI_2).unwrap();
        assert!(r.is_satisfied() && r.boundary);
        assert!(!necessary_incremental(&pair(1.0, [-3.0, 3.0]), FRAC_PI_2).unwrap().is_satisfied());
        let shifted = necessary_absolute(&pair(1.0, [4.0, 6.0]), FRAC_PI_2).unwrap();
        assert!(shifted.is_satisfied());
        assert_eq!(shifted.omega_shift, 5.0);
        assert!(necessary_absolute(&zero, 2.0).is_err());
    }

    #[test]
    fn kuramoto_bounds() {
        assert_eq!(kuramoto_explicit_kc(&[-1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(kuramoto_explicit_kc(&[0.3; 5]).unwrap(), 0.0);
        let (gmin, gmax) = kuramoto_gamma_bounds(4.0, &[-1.0, 1.0]).unwrap();
        assert!((gmin - PI / 6.0).abs() < 1e-15 && (gmax - 5.0 * PI / 6.0).abs() < 1e-15);
        let (gmin, gmax) = kuramoto_gamma_bounds(1e12, &[-1.0, 1.0]).unwrap();
        assert!(gmin < 1e-11 && (PI - gmax) < 1e-11);
        let (gmin, gmax) = kuramoto_gamma_bounds(2.0 * (1.0 + 1e-9), &[-1.0, 1.0]).unwrap();
        assert!((gmin - FRAC_PI_2).abs() < 1e-4 && (gmax - FRAC_PI_2).abs() < 1e-4);
        assert!(matches!(kuramoto_gamma_bounds(2.0, &[-1.0, 1.0]), Err(Error::ConditionViolated(_))));

        // K_c/K = 1/2 → √((1 + √3/2)/2) = cos(π/12)
        let r = kuramoto_order_bound(4.0, &[-1.0, 1.0]).unwrap();
        assert!((r - (PI / 12.0).cos()).abs() < 1e-15);
        assert!((r - 0.96593).abs() < 1e-5);
        assert!((kuramoto_order_bound(1e9, &[-1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);

        assert_eq!(kuramoto_necessary_bound(&[-1.0, 1.0]).unwrap(), 2.0);
        let big: Vec<f64> = (0..100_000).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        assert!((kuramoto_necessary_bound(&big).unwrap() - 1.0).abs() < 1e-4);
        assert_eq!(kuramoto_necessary_bound(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn implicit_two_oscillators() {
        // n = 2: both terms have (Ω/u)² = x², so 2(1 − x²) = 1 → u* = √2·|Ω|
        let vm = verwoerd_mason_kc(&[-1.0, 1.0]).unwrap();
        assert!((vm.u_star - 2f64.sqrt()).abs() < 1e-12);
        assert!((vm.kc - 2.0).abs() < 1e-12);
        assert!(vm.residual.abs() < 1e-8);
        assert!(!vm.is_ambiguous());
    }

    #[test]
    fn implicit_bipolar_is_worst_case() {
        for n in [2, 4, 10, 50] {
            let omega: Vec<f64> = (0..n).map(|i| if i < n / 2 { -1.0 } else { 1.0 }).collect();
            let vm = verwoerd_mason_kc(&omega).unwrap();
            assert!((vm.kc - 2.0).abs() < 1e-10, "n = {n}: {}", vm.kc);
        }
    }

    #[test]
    fn implicit_degenerate() {
        assert!(matches!(verwoerd_mason_kc(&[0.7, 0.7, 0.7]), Err(Error::Degenerate(_))));
        assert!(verwoerd_mason_kc(&[1.0]).is_err());
    }

    #[test]
    fn implicit_uniform_large_n() {
        // evenly spaced quantiles of U[−1, 1]
        let n = 4000;
        let omega: Vec<f64> = (0..n).map(|i| -1.0 + (2.0 * i as f64 + 1.0) / n as f64).collect();
        let vm = verwoerd_mason_kc(&omega).unwrap();
        assert!((vm.kc - 4.0 / PI).abs() < 0.02, "{}", vm.kc);
    }

    #[test]
    fn continuum_examples() {
        assert!((continuum_kc(0.5).unwrap() - 4.0 / PI).abs() < 1e-15);
        assert!((continuum_kc(2.0 / PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(continuum_kc(1e300).unwrap() < 1e-299);
        assert!(continuum_kc(0.0).is_err());
    }

    #[test]
    fn theorem4_examples() {
        let zero = OscillatorNetwork::new(WeightedGraph::ring(5, 1.0).unwrap(), vec![0.0; 5]).unwrap();
        let r = theorem4_check(&zero, None).unwrap();
        assert!(r.is_satisfied());
        assert_eq!(r.get("gamma_min"), Some(0.0));
        assert_eq!(r.get("gamma_max"), Some(PI));

        // two nodes: ‖B_cᵀω‖ = 2, λ₂ = 2a
        assert!(theorem4_check(&pair(1.01, [-1.0, 1.0]), None).unwrap().is_satisfied());
        assert!(!theorem4_check(&pair(0.99, [-1.0, 1.0]), None).unwrap().is_satisfied());
        let edge = theorem4_check(&pair(1.0, [-1.0, 1.0]), None).unwrap();
        assert_eq!(edge.verdict, Verdict::Violated);
        assert!(edge.boundary);

        let r = theorem4_check(&pair(2.0, [-1.0, 1.0]), Some(0.5)).unwrap();
        let gmax = r.get("gamma_max").unwrap();
        assert!((FRAC_PI_2 * sinc(gmax) - 0.5).abs() < 1e-12);
        assert!(gmax > FRAC_PI_2 && gmax <= PI);
        assert!((r.get("gamma_min").unwrap() - PI / 6.0).abs() < 1e-15);
        assert!((r.get("sync_rate").unwrap() - 4.0 * 0.5f64.cos()).abs() < 1e-15);

        let disconnected = OscillatorNetwork::new(WeightedGraph::new(3, &[(0, 1, 1.0)]).unwrap(), vec![0.0; 3]).unwrap();
        assert!(theorem4_check(&disconnected, None).is_err());
        assert!(theorem5_check(&disconnected).is_err());
    }

    #[test]
    fn theorem5_examples() {
        assert!(theorem5_check(&pair(1.01, [-1.0, 1.0])).unwrap().is_satisfied());
        assert!(!theorem5_check(&pair(1.0, [-1.0, 1.0])).unwrap().is_satisfied());
        let zero = OscillatorNetwork::new(WeightedGraph::star(4, 1.0).unwrap(), vec![0.0; 4]).unwrap();
        let r = theorem5_check(&zero).unwrap();
        assert!(r.is_satisfied());
        assert_eq!(r.get("gamma_min"), Some(0.0));
    }

    #[test]
    fn equilibrium_two_nodes() {
        let eq = solve_equilibrium(&pair(1.25, [-1.0, 1.0]), 0.5).unwrap();
        assert!((eq.edge_differences[0] - 0.8f64.asin()).abs() < 1e-9);
        assert!((0.8f64.asin() - 0.92730).abs() < 1e-5);
        assert_eq!(eq.stability, Stability::Stable);
        assert!(eq.residual < 1e-10);

        let zero = OscillatorNetwork::new(WeightedGraph::ring(5, 1.0).unwrap(), vec![0.0; 5]).unwrap();
        let eq = solve_equilibrium(&zero, 0.5).unwrap();
        assert_eq!(eq.iterations, 0);
        assert!(eq.theta.as_slice().iter().all(|x| *x == 0.0));
        assert_eq!(eq.stability, Stability::Stable);
    }

    #[test]
    fn equilibrium_residual_contract() {
        let g = WeightedGraph::new(4, &[(0, 1, 2.0), (1, 2, 1.5), (2, 3, 2.5), (0, 3, 1.0)]).unwrap();
        let net = OscillatorNetwork::new(g, vec![0.4, -0.3, 0.5, -0.6]).unwrap();
        let eq = solve_equilibrium(&net, 0.5).unwrap();
        let rhs = crate::models::coupled_rhs(&net, &eq.theta).unwrap();
        assert!(rhs.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-9);
    }

    #[test]
    fn equilibrium_absent_when_too_weak() {
        assert!(matches!(solve_equilibrium(&pair(0.5, [-1.0, 1.0]), 0.5), Err(Error::NoEquilibrium { .. })));
    }

    #[test]
    fn classify_examples() {
        let net = pair(1.25, [-1.0, 1.0]);
        let s = 0.8f64.asin();
        let stable = PhaseState::new(vec![0.0, s]).unwrap();
        let saddle = PhaseState::new(vec![0.0, PI - s]).unwrap();
        assert_eq!(classify_equilibrium(&net, &stable).unwrap(), Stability::Stable);
        assert_eq!(classify_equilibrium(&net, &saddle).unwrap(), Stability::Unstable);
        let far = PhaseState::new(vec![0.0, 0.1]).unwrap();
        assert!(classify_equilibrium(&net, &far).is_err());

        let zero = OscillatorNetwork::new(WeightedGraph::path(4, 0.3).unwrap(), vec![0.0; 4]).unwrap();
        let sync = PhaseState::new(vec![1.0; 4]).unwrap();
        assert_eq!(classify_equilibrium(&zero, &sync).unwrap(), Stability::Stable);
    }

    #[test]
    fn sync_frequency_examples() {
        assert_eq!(sync_frequency(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(sync_frequency(&[-1.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(sync_frequency(&[4.5; 3]).unwrap(), 4.5);
    }

    #[test]
    fn report_json_fields() {
        let r = theorem5_check(&pair(2.0, [-1.0, 1.0])).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["name", "threshold", "actual", "verdict", "boundary", "omega_shift", "derived"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["verdict"], "satisfied");
        let back: ConditionReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn bound_ordering(omega in prop::collection::vec(-3.0..3.0f64, 2..40)) {
            let nec = kuramoto_necessary_bound(&omega).unwrap();
            let exp = kuramoto_explicit_kc(&omega).unwrap();
            let vm = verwoerd_mason_kc(&omega).unwrap();
            prop_assert!(nec <= vm.kc * (1.0 + 1e-12));
            prop_assert!(vm.kc <= exp * (1.0 + 1e-12));
            prop_assert!(vm.residual.abs() < 1e-8);
        }

        #[test]
        fn implicit_scale_covariant(omega in prop::collection::vec(-1.0..1.0f64, 2..20), c in 0.1..10.0f64) {
            let a = verwoerd_mason_kc(&omega).unwrap().kc;
            let scaled: Vec<f64> = omega.iter().map(|w| c * w).collect();
            let b = verwoerd_mason_kc(&scaled).unwrap().kc;
            prop_assert!((b - c * a).abs() <= 1e-9 * c * a);
        }

        #[test]
        fn order_bound_is_half_angle_cosine(k in 2.001..50.0f64) {
            let omega = [-1.0, 0.3, 1.0];
            let (gmin, _) = kuramoto_gamma_bounds(k, &omega).unwrap();
            let r = kuramoto_order_bound(k, &omega).unwrap();
            prop_assert!((r - (gmin / 2.0).cos()).abs() < 1e-12);
        }

        #[test]
        fn theorem5_check_implies_theorem4_check(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..10);
            let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|j| (rng.gen_range(0..j), j, rng.gen_range(0.5..2.0))).collect();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(0.3) && !edges.iter().any(|e| (e.0, e.1) == (i, j)) {
                        edges.push((i, j, rng.gen_range(0.5..2.0)));
                    }
                }
            }
            let omega: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let net = OscillatorNetwork::new(WeightedGraph::new(n, &edges).unwrap(), omega).unwrap();
            let t4 = theorem4_check(&net, None).unwrap();
            let t5 = theorem5_check(&net).unwrap();
            prop_assert!(t5.threshold <= t4.threshold + 1e-12);
        }
    }
}
