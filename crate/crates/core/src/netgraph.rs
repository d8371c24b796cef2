//! Undirected weighted coupling graphs and their spectral quantities.
//!
//! Edges are oriented from the lower node index (source) to the higher one
//! (sink), so incidence matrices are reproducible bit for bit.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance separating the zero Laplacian eigenvalue from the rest.
pub const CONNECTIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: usize,
    pub sink: usize,
    pub weight: f64,
}

/// Undirected graph `G(V, E, A)` with strictly positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

/// On-disk layout: `{"n": 3, "edges": [[0, 1, 1.0], [1, 2, 0.5]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<GraphFile> for WeightedGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        WeightedGraph::new(f.n, &f.edges)
    }
}

impl From<WeightedGraph> for GraphFile {
    fn from(g: WeightedGraph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|e| (e.source, e.sink, e.weight)).collect(),
        }
    }
}

impl WeightedGraph {
    /// Validate and normalize an edge list to `i < j` orientation.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one node"));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid(format!("edge ({i}, {j}) has non-positive weight {w}")));
            }
            let (source, sink) = if i < j { (i, j) } else { (j, i) };
            if !seen.insert((source, sink)) {
                return Err(Error::invalid(format!("duplicate edge ({source}, {sink})")));
            }
            out.push(Edge { source, sink, weight: w });
        }
        Ok(WeightedGraph { n, edges: out })
    }

    pub fn complete(n: usize, weight: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("complete graph needs n >= 2"));
        }
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j, weight)))
            .collect();
        Self::new(n, &edges)
    }

    /// Cycle `0–1–…–(n−1)–0`.
    pub fn ring(n: usize, weight: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("ring needs n >= 3"));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, weight)).collect();
        Self::new(n, &edges)
    }

    pub fn path(n: usize, weight: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("path needs n >= 2"));
        }
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, weight)).collect();
        Self::new(n, &edges)
    }

    /// Node 0 joined to every other node.
    pub fn star(n: usize, weight: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("star needs n >= 2"));
        }
        let edges: Vec<_> = (1..n).map(|j| (0, j, weight)).collect();
        Self::new(n, &edges)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Copy of the graph with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.source, e.sink, e.weight * factor))
            .collect();
        Self::new(self.n, &edges)
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.source, e.sink)] = e.weight;
            a[(e.sink, e.source)] = e.weight;
        }
        a
    }

    /// Weighted nodal degree `Σⱼ aᵢⱼ`.
    pub fn degree(&self, i: usize) -> Result<f64> {
        if i >= self.n {
            return Err(Error::invalid(format!("node {i} out of range for n = {}", self.n)));
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| e.source == i || e.sink == i)
            .map(|e| e.weight)
            .sum())
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.source] += e.weight;
            d[e.sink] += e.weight;
        }
        d
    }

    /// `L = diag(deg) − A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        weighted_laplacian(self.n, &self.edges, |e| e.weight)
    }

    pub fn spectrum(&self) -> SpectralSummary {
        SpectralSummary::of(&self.laplacian())
    }

    /// Second-smallest Laplacian eigenvalue λ₂(L).
    pub fn algebraic_connectivity(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.spectrum().lambda2()
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.source].push(e.sink);
            adj[e.sink].push(e.source);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Node-edge incidence matrix `B` with `+1` at the sink and `−1` at the
    /// source of each edge.
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n, self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            b[(e.source, k)] = -1.0;
            b[(e.sink, k)] = 1.0;
        }
        b
    }

    pub fn edge_weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.edges.len(), self.edges.iter().map(|e| e.weight))
    }

    /// `(Bᵀx)ₑ = x_sink − x_source` for each edge, without forming `B`.
    pub fn edge_differences(&self, x: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|e| x[e.sink] - x[e.source]).collect()
    }

    /// Whether the adjacency matrix, in the given node order, is circulant.
    pub fn is_circulant(&self) -> bool {
        let a = self.adjacency();
        let n = self.n;
        (1..n).all(|i| (0..n).all(|j| a[(i, j)] == a[(i - 1, (j + n - 1) % n)]))
    }

    /// True when every edge carries the same weight.
    pub fn is_uniformly_weighted(&self) -> bool {
        self.edges
            .first()
            .is_none_or(|f| self.edges.iter().all(|e| e.weight == f.weight))
    }
}

/// Laplacian `B·diag(w)·Bᵀ` of the given edge set under a weight map.
pub(crate) fn weighted_laplacian(n: usize, edges: &[Edge], weight: impl Fn(&Edge) -> f64) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for e in edges {
        let w = weight(e);
        l[(e.source, e.source)] += w;
        l[(e.sink, e.sink)] += w;
        l[(e.source, e.sink)] -= w;
        l[(e.sink, e.source)] -= w;
    }
    l
}

/// Incidence matrix of the unweighted complete graph on `n` nodes, columns
/// ordered lexicographically by `(i, j)`, `i < j`.
pub fn complete_incidence(n: usize) -> Result<DMatrix<f64>> {
    Ok(WeightedGraph::complete(n, 1.0)?.incidence())
}

/// Eigen-decomposition of a symmetric Laplacian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralSummary {
    pub fn of(l: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(l.clone());
        let n = l.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        SpectralSummary { eigenvalues, eigenvectors }
    }

    pub fn lambda2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0).max(0.0)
    }
}

/// Moore–Penrose pseudoinverse of a connected-graph Laplacian.
///
/// The zero eigenvalue's reciprocal is replaced by zero, so
/// `L·L† = L†·L = I − (1/n)·11ᵀ`.
pub fn laplacian_pseudoinverse(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    if n != l.ncols() {
        return Err(Error::invalid("Laplacian must be square"));
    }
    if n == 1 {
        return Ok(DMatrix::zeros(1, 1));
    }
    let eig = SpectralSummary::of(l);
    let scale = eig.eigenvalues[n - 1].abs().max(1.0);
    if eig.eigenvalues[1] <= CONNECTIVITY_TOL * scale {
        return Err(Error::RankDeficient(format!(
            "second eigenvalue {:.3e} is numerically zero",
            eig.eigenvalues[1]
        )));
    }
    let v = &eig.eigenvectors;
    let mut inv = DMatrix::zeros(n, n);
    for k in 1..n {
        let col = v.column(k);
        inv += (col * col.transpose()) / eig.eigenvalues[k];
    }
    Ok(inv)
}
