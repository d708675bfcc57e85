//! Approximate-isomorphism witnesses between two graph sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BoxSpace, Graph, VertexSet};

/// `map[i]` is the image of the `i`-th smallest vertex of `y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexWitness {
    pub y: VertexSet,
    pub y_prime: VertexSet,
    pub map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxIsoWitness {
    pub entries: Vec<IndexWitness>,
}

impl ApproxIsoWitness {
    /// Identity on every vertex of every graph.
    pub fn identity(x: &BoxSpace) -> ApproxIsoWitness {
        ApproxIsoWitness {
            entries: x
                .graphs()
                .iter()
                .map(|g| IndexWitness {
                    y: VertexSet::full(g.n()),
                    y_prime: VertexSet::full(g.n()),
                    map: (0..g.n()).collect(),
                })
                .collect(),
        }
    }
}

/// `|Y|/|X|`, `|Y'|/|X'|`, `|E(Y)|/|E(X)|`, `|E(Y')|/|E(X')|`; an empty
/// denominator gives 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsoRatios {
    pub vertices: f64,
    pub vertices_prime: f64,
    pub edges: f64,
    pub edges_prime: f64,
}

impl IsoRatios {
    pub fn min(&self) -> f64 {
        self.vertices.min(self.vertices_prime).min(self.edges).min(self.edges_prime)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxIsoReport {
    pub ratios: Vec<IsoRatios>,
    /// First index of the tail used for the verdict.
    pub tail_start: usize,
    pub tolerance: f64,
    /// Every ratio in the last quarter of indices is at least `1 − tolerance`.
    pub verdict: bool,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

fn induced_edges(g: &Graph, mask: &[bool]) -> usize {
    g.edges().filter(|&(u, v)| mask[u] && mask[v]).count()
}

fn check_index(index: usize, x: &Graph, x2: &Graph, w: &IndexWitness) -> Result<IsoRatios> {
    w.y.check_range(x.n())?;
    w.y_prime.check_range(x2.n())?;
    if w.map.len() != w.y.len() {
        return Err(Error::InvalidArgument(format!(
            "index {index}: map has {} entries for {} vertices",
            w.map.len(),
            w.y.len()
        )));
    }
    let image = VertexSet::new(w.map.clone());
    if image.len() != w.map.len() || image != w.y_prime {
        return Err(Error::InvalidArgument(format!(
            "index {index}: map is not a bijection onto Y'"
        )));
    }
    let mut to = vec![usize::MAX; x.n()];
    for (&v, &fv) in w.y.iter().collect::<Vec<_>>().iter().zip(&w.map) {
        to[v] = fv;
    }
    let mut from = vec![usize::MAX; x2.n()];
    for (v, &fv) in w.y.iter().zip(&w.map) {
        from[fv] = v;
    }
    for u in w.y.iter() {
        for &v in x.neighbors(u) {
            if u < v && to[v] != usize::MAX && !x2.has_edge(to[u], to[v]) {
                return Err(Error::NotAnIsomorphism { index, u, v });
            }
        }
    }
    for u2 in w.y_prime.iter() {
        for &v2 in x2.neighbors(u2) {
            if u2 < v2 && from[v2] != usize::MAX && !x.has_edge(from[u2], from[v2]) {
                let (u, v) = (from[u2].min(from[v2]), from[u2].max(from[v2]));
                return Err(Error::NotAnIsomorphism { index, u, v });
            }
        }
    }
    let mask = w.y.mask(x.n());
    let mask2 = w.y_prime.mask(x2.n());
    Ok(IsoRatios {
        vertices: ratio(w.y.len(), x.n()),
        vertices_prime: ratio(w.y_prime.len(), x2.n()),
        edges: ratio(induced_edges(x, &mask), x.edge_count()),
        edges_prime: ratio(induced_edges(x2, &mask2), x2.edge_count()),
    })
}

/// Verifies every map as an isomorphism of induced subgraphs and reports
/// the four ratio sequences. Self-loops are ignored.
pub fn approx_iso_check(x: &BoxSpace, x2: &BoxSpace, w: &ApproxIsoWitness, tol: f64) -> Result<ApproxIsoReport> {
    if x.len() != x2.len() || w.entries.len() != x.len() {
        return Err(Error::InvalidArgument(format!(
            "sequence lengths differ: {}, {}, witness {}",
            x.len(),
            x2.len(),
            w.entries.len()
        )));
    }
    let ratios = x
        .graphs()
        .iter()
        .zip(x2.graphs())
        .zip(&w.entries)
        .enumerate()
        .map(|(i, ((a, b), e))| check_index(i, a, b, e))
        .collect::<Result<Vec<_>>>()?;
    let tail_start = ratios.len() - ratios.len().div_ceil(4);
    let verdict = ratios[tail_start..].iter().all(|r| r.min() >= 1.0 - tol);
    Ok(ApproxIsoReport {
        ratios,
        tail_start,
        tolerance: tol,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::families::{complete, cycle};

    #[test]
    fn identity_passes() {
        let x = BoxSpace::from_graphs(vec![complete(4), cycle(6).unwrap()]);
        let rep = approx_iso_check(&x, &x, &ApproxIsoWitness::identity(&x), 0.0).unwrap();
        assert!(rep.verdict);
        assert!(rep.ratios.iter().all(|r| r.min() == 1.0));
    }

    #[test]
    fn corrupted_map_is_rejected() {
        let c = cycle(5).unwrap();
        let x = BoxSpace::from_graphs(vec![c]);
        let mut w = ApproxIsoWitness::identity(&x);
        w.entries[0].map.swap(1, 2);
        // 0–1 is an edge, 0–2 is not
        assert_eq!(
            approx_iso_check(&x, &x, &w, 0.0),
            Err(Error::NotAnIsomorphism { index: 0, u: 0, v: 1 })
        );
    }

    #[test]
    fn partial_witness_ratios() {
        let c = cycle(6).unwrap();
        let x = BoxSpace::from_graphs(vec![c]);
        let w = ApproxIsoWitness {
            entries: vec![IndexWitness {
                y: VertexSet::new(vec![0, 1, 2]),
                y_prime: VertexSet::new(vec![3, 4, 5]),
                map: vec![3, 4, 5],
            }],
        };
        let rep = approx_iso_check(&x, &x, &w, 0.1).unwrap();
        assert_eq!(rep.ratios[0].vertices, 0.5);
        assert_eq!(rep.ratios[0].edges, 2.0 / 6.0);
        assert!(!rep.verdict);
    }
}
