#![allow(dead_code)]

use oscsync::WeightedGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus each remaining pair with probability `p`,
/// weights uniform in `[0.5, 2]`.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut impl Rng) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for j in 1..n {
        let i = rng.gen_range(0..j);
        edges.push((i, j, rng.gen_range(0.5..2.0)));
        present[i][j] = true;
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present[i][j] && rng.gen_bool(p) {
                edges.push((i, j, rng.gen_range(0.5..2.0)));
            }
        }
    }
    WeightedGraph::new(n, &edges).expect("valid random graph")
}

pub fn uniform_vec(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn centered(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}
