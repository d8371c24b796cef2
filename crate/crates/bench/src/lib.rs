//! Reproducible inputs shared by the benchmarks.

use oscsync::harness::{stream_rng, FrequencyDistribution};
use oscsync::{OscillatorNetwork, WeightedGraph};

/// Frequencies i.i.d. uniform on `[−1, 1]`.
pub fn frequencies(n: usize, seed: u64) -> Vec<f64> {
    FrequencyDistribution::default().sample(n, &mut stream_rng(seed, n as u64)).expect("uniform sampling")
}

/// Kuramoto network with coupling comfortably above critical.
pub fn kuramoto(n: usize, seed: u64) -> OscillatorNetwork {
    OscillatorNetwork::kuramoto(4.0, frequencies(n, seed)).expect("valid network")
}

/// Ring with chords to the nodes three steps away, mildly heterogeneous.
pub fn sparse(n: usize, seed: u64) -> OscillatorNetwork {
    let edges: Vec<_> = (0..n).flat_map(|i| [(i, (i + 1) % n, 4.0), (i, (i + 3) % n, 2.0)]).collect();
    let graph = WeightedGraph::new(n, &edges).expect("valid graph");
    let omega = frequencies(n, seed).iter().map(|w| 0.1 * w).collect();
    OscillatorNetwork::new(graph, omega).expect("valid network")
}
