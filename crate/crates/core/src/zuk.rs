//! Link graphs, triangle weights and the link-spectrum gap certificate.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::dense_symmetric_eigen;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::scalar::Real;
use crate::spectral::{laplacian, spectrum, weighted_laplacian, SymmetricOperator};

/// Triangle counts per edge and per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleCounts {
    /// `τ(u, v)` keyed by `(u, v)` with `u < v`.
    pub edge: BTreeMap<(usize, usize), usize>,
    /// `τ(x) = Σ_y τ(x, y)`
    pub vertex: Vec<usize>,
}

impl TriangleCounts {
    /// `τ(u, v)`; zero for non-edges.
    pub fn tau(&self, u: usize, v: usize) -> usize {
        self.edge.get(&(u.min(v), u.max(v))).copied().unwrap_or(0)
    }

    pub fn triangle_count(&self) -> usize {
        self.vertex.iter().sum::<usize>() / 6
    }
}

fn common_neighbors(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

pub fn triangle_counts(g: &Graph) -> TriangleCounts {
    let mut edge = BTreeMap::new();
    let mut vertex = vec![0; g.n()];
    for (u, v) in g.edges() {
        let t = common_neighbors(g.neighbors(u), g.neighbors(v));
        edge.insert((u, v), t);
        vertex[u] += t;
        vertex[v] += t;
    }
    TriangleCounts { edge, vertex }
}

/// The graph induced on the neighbours of `base`, with local indices in the
/// order of `vertices`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkGraph {
    pub base: usize,
    pub vertices: Vec<usize>,
    #[serde(skip)]
    pub graph: Graph,
    /// `τ(base, y)` for each link vertex, equal to its link degree.
    pub tau_edge: Vec<usize>,
    pub tau_total: usize,
    /// False for empty and single-vertex links.
    pub connected: bool,
}

impl LinkGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `ν(y) = τ(x,y)/τ(x)`; `None` when `τ(x) = 0`.
    pub fn nu<T: Real>(&self) -> Option<Vec<T>> {
        if self.tau_total == 0 {
            return None;
        }
        let total = T::from_count(self.tau_total);
        Some(self.tau_edge.iter().map(|&t| T::from_count(t) / total).collect())
    }

    /// `μ(y, ·) = 1/τ(x,y)` per link vertex; `None` for isolated link vertices.
    pub fn mu<T: Real>(&self) -> Vec<Option<T>> {
        self.tau_edge
            .iter()
            .map(|&t| (t > 0).then(|| T::one() / T::from_count(t)))
            .collect()
    }
}

pub fn link_graph(g: &Graph, x: usize) -> Result<LinkGraph> {
    if x >= g.n() {
        return Err(Error::VertexOutOfRange { vertex: x, n: g.n() });
    }
    let vertices = g.neighbors(x).to_vec();
    let (graph, _) = g.induced_subgraph(&VertexSet::new(vertices.clone()))?;
    let tau_edge: Vec<usize> = (0..graph.n()).map(|i| graph.simple_degree(i)).collect();
    let connected = graph.n() >= 2 && graph.is_connected();
    Ok(LinkGraph {
        base: x,
        tau_total: tau_edge.iter().sum(),
        vertices,
        graph,
        tau_edge,
        connected,
    })
}

/// First positive eigenvalue of the random-walk Laplacian of a connected
/// link, via `I − D^{-1/2} A D^{-1/2}`.
pub fn link_lambda1<T: Real>(l: &LinkGraph) -> Result<T> {
    if l.is_empty() {
        return Err(Error::EmptyLink(l.base));
    }
    if !l.connected {
        return Err(Error::DisconnectedLink(l.base));
    }
    let m = l.len();
    let inv_sqrt: Vec<T> = l.tau_edge.iter().map(|&t| T::one() / T::from_count(t).sqrt()).collect();
    let mut dense = vec![T::zero(); m * m];
    for i in 0..m {
        dense[i * m + i] = T::one();
        for &j in l.graph.neighbors(i) {
            dense[i * m + j] = -inv_sqrt[i] * inv_sqrt[j];
        }
    }
    Ok(dense_symmetric_eigen(m, &dense)?.values[1])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZukCertificate<T> {
    /// `λ₁(L_x)` for every vertex of the graph.
    pub per_vertex_lambda1: Vec<T>,
    /// Minimum over the designated subset; `None` when it is empty.
    pub min_lambda: Option<T>,
    /// `2 − 1/min_lambda`
    pub c: Option<T>,
    /// `min_lambda > 1/2 + tol`
    pub valid: bool,
    pub coverage: f64,
    pub all_links_connected: bool,
    /// The subset is the whole vertex set.
    pub covers_all: bool,
}

/// Certificate over the subset `y` (all vertices when `None`). Every link
/// must be connected; the first failing vertex is reported.
pub fn zuk_certificate<T: Real>(g: &Graph, y: Option<&VertexSet>, tol: T) -> Result<ZukCertificate<T>> {
    let n = g.n();
    let y = match y {
        Some(y) => {
            y.check_range(n)?;
            y.clone()
        }
        None => VertexSet::full(n),
    };
    let lambdas = (0..n)
        .into_par_iter()
        .map(|x| link_graph(g, x).and_then(|l| link_lambda1::<T>(&l)))
        .collect::<Vec<Result<T>>>();
    let mut per_vertex = Vec::with_capacity(n);
    for (x, r) in lambdas.into_iter().enumerate() {
        match r {
            Ok(l) => per_vertex.push(l),
            Err(Error::EmptyLink(_)) => return Err(Error::DisconnectedLink(x)),
            Err(e) => return Err(e),
        }
    }
    let min_lambda = y.iter().map(|x| per_vertex[x]).reduce(T::min);
    let half = T::lit(0.5);
    Ok(ZukCertificate {
        c: min_lambda.map(|m| T::lit(2.0) - T::one() / m),
        valid: min_lambda.is_some_and(|m| m > half + tol),
        min_lambda,
        coverage: if n == 0 { 1.0 } else { y.len() as f64 / n as f64 },
        all_links_connected: true,
        covers_all: y.len() == n,
        per_vertex_lambda1: per_vertex,
    })
}

/// Laplacian with edge weights `τ(x, y)`.
pub fn delta_tau<T: Real>(g: &Graph) -> SymmetricOperator<T> {
    let tau = triangle_counts(g);
    let weighted: Vec<(usize, usize, T)> = tau
        .edge
        .iter()
        .map(|(&(u, v), &t)| (u, v, T::from_count(t)))
        .collect();
    weighted_laplacian(g.n(), &weighted)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport<T> {
    pub trials: usize,
    pub failures: usize,
    /// Smallest `⟨Δ_τξ,ξ⟩ − ⟨Δξ,ξ⟩` seen.
    pub min_lower_slack: T,
    /// Smallest `d⟨Δξ,ξ⟩ − ⟨Δ_τξ,ξ⟩` seen.
    pub min_upper_slack: T,
}

impl<T> SandwichReport<T> {
    pub fn holds(&self) -> bool {
        self.failures == 0
    }
}

/// Samples `⟨Δξ,ξ⟩ − tol ≤ ⟨Δ_τξ,ξ⟩ ≤ d⟨Δξ,ξ⟩ + tol` on random `ξ` with
/// entries uniform in `[−1, 1]`, `d` the graph's degree bound.
pub fn sandwich_check<T: Real>(g: &Graph, trials: usize, tol: T, seed: u64) -> Result<SandwichReport<T>> {
    let tau = triangle_counts(g);
    if let Some((&(u, v), _)) = tau.edge.iter().find(|(_, &t)| t == 0) {
        return Err(Error::EdgeWithoutTriangle(u, v));
    }
    let lap = laplacian::<T>(g);
    let lt = delta_tau::<T>(g);
    let d = T::from_count(g.degree_bound());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SandwichReport {
        trials,
        failures: 0,
        min_lower_slack: T::infinity(),
        min_upper_slack: T::infinity(),
    };
    for _ in 0..trials {
        let xi: Vec<T> = (0..g.n()).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect();
        let a = lap.quadratic_form(&xi);
        let b = lt.quadratic_form(&xi);
        let lower = b - a;
        let upper = d * a - b;
        if lower < -tol || upper < -tol {
            report.failures += 1;
        }
        report.min_lower_slack = report.min_lower_slack.min(lower);
        report.min_upper_slack = report.min_upper_slack.min(upper);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZukGapCheck<T> {
    /// The certificate is valid over all vertices.
    pub applicable: bool,
    pub c: Option<T>,
    /// Smallest eigenvalue of `Δ_τ` above its kernel.
    pub gap: Option<T>,
    pub passes: bool,
}

/// Checks `gap(Δ_τ) ≥ c − tol` for a valid all-vertex certificate.
pub fn verify_zuk_gap<T: Real>(g: &Graph, tol: T) -> Result<ZukGapCheck<T>> {
    let cert = zuk_certificate::<T>(g, None, tol)?;
    if !cert.valid {
        return Ok(ZukGapCheck {
            applicable: false,
            c: cert.c,
            gap: None,
            passes: false,
        });
    }
    let c = cert.c.expect("valid certificate has c");
    let gap = spectrum(&delta_tau::<T>(g), g.n().min(1), tol)?.gap;
    Ok(ZukGapCheck {
        applicable: true,
        c: Some(c),
        gap: Some(gap),
        passes: gap >= c - tol,
    })
}
