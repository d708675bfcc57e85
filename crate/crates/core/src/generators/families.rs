//! Explicit graph families and gluing constructions.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

fn from_set(n: usize, edges: BTreeSet<(usize, usize)>, d: usize) -> Result<Graph> {
    Graph::new(n, &edges.into_iter().collect::<Vec<_>>(), d)
}

pub fn complete(n: usize) -> Graph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            e.push((u, v));
        }
    }
    Graph::new(n, &e, n.saturating_sub(1)).expect("complete graph")
}

/// `C_n` for `n ≥ 3`.
pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("cycle needs n ≥ 3, got {n}")));
    }
    Graph::new(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>(), 2)
}

pub fn path(n: usize) -> Graph {
    let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &e, 2.min(n.saturating_sub(1))).expect("path graph")
}

/// Complete multipartite graph; parts are consecutive index ranges.
pub fn complete_multipartite(parts: &[usize]) -> Graph {
    let n: usize = parts.iter().sum();
    let mut part = Vec::with_capacity(n);
    for (k, &s) in parts.iter().enumerate() {
        part.extend(std::iter::repeat_n(k, s));
    }
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if part[u] != part[v] {
                e.push((u, v));
            }
        }
    }
    let d = parts.iter().map(|&s| n - s).max().unwrap_or(0);
    Graph::new(n, &e, d).expect("multipartite graph")
}

/// `K_{2,2,2}`: vertex `i` is opposite `i + 3`.
pub fn octahedron() -> Graph {
    let mut e = Vec::new();
    for u in 0..6 {
        for v in u + 1..6 {
            if v != u + 3 {
                e.push((u, v));
            }
        }
    }
    Graph::new(6, &e, 4).expect("octahedron")
}

/// Margulis-type graph on `(Z/n)²`, vertex `(x, y)` at `x·n + y`, from the
/// maps `(x±y, y)`, `(x, y±x)`, `(x±1, y)`, `(x, y±1)` with loops and
/// multi-edges collapsed. Degree bound 8.
pub fn margulis(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("margulis needs n ≥ 2, got {n}")));
    }
    let mut edges = BTreeSet::new();
    let m = n as i64;
    let at = |x: i64, y: i64| (x.rem_euclid(m) * m + y.rem_euclid(m)) as usize;
    for x in 0..m {
        for y in 0..m {
            let v = at(x, y);
            for w in [
                at(x + y, y),
                at(x - y, y),
                at(x, y + x),
                at(x, y - x),
                at(x + 1, y),
                at(x - 1, y),
                at(x, y + 1),
                at(x, y - 1),
            ] {
                if w != v {
                    edges.insert((v.min(w), v.max(w)));
                }
            }
        }
    }
    // The eight maps are closed under inversion, so in- and out-neighbours
    // coincide and the degree stays at most 8.
    from_set(n * n, edges, 8)
}

/// Triangulated torus on `(Z/m)²` with neighbour offsets `(±1, 0)`,
/// `(0, ±1)`, `(1, −1)`, `(−1, 1)`; every link is a 6-cycle. Needs `m ≥ 4`.
pub fn triangular_torus(m: usize) -> Result<Graph> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!("triangular torus needs m ≥ 4, got {m}")));
    }
    let k = m as i64;
    let at = |x: i64, y: i64| (x.rem_euclid(k) * k + y.rem_euclid(k)) as usize;
    let mut edges = BTreeSet::new();
    for x in 0..k {
        for y in 0..k {
            let v = at(x, y);
            for (dx, dy) in [(1, 0), (0, 1), (1, -1)] {
                let w = at(x + dx, y + dy);
                edges.insert((v.min(w), v.max(w)));
            }
        }
    }
    from_set(m * m, edges, 6)
}

/// Disjoint union of `g1` and `g2` plus the bridge `(v1, |g1| + v2)`. The
/// degree bound is the larger of the two.
pub fn glue_pair(g1: &Graph, g2: &Graph, v1: usize, v2: usize) -> Result<Graph> {
    for (g, v) in [(g1, v1), (g2, v2)] {
        if v >= g.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: g.n() });
        }
    }
    let union = Graph::disjoint_union(&[g1, g2]);
    let d = union.degree_bound();
    for v in [v1, g1.n() + v2] {
        if union.degree(v) >= d {
            return Err(Error::DegreeExceeded { vertex: v, bound: d });
        }
    }
    union.edited(&[], &[(v1, g1.n() + v2)])
}

/// Disjoint union of `x_prime` (first) and `y`, with every vertex of
/// `y ∖ t` matched to a distinct random vertex of `x_prime` by an edge
/// labelled `"b"`, and a loop on every vertex left unmatched. Each vertex
/// needs one unit of headroom under its own graph's degree bound.
pub fn glued_expander(x_prime: &Graph, y: &Graph, t: &VertexSet, seed: u64) -> Result<Graph> {
    t.check_range(y.n())?;
    let wired: Vec<usize> = t.complement(y.n()).into_vec();
    if wired.len() > x_prime.n() {
        return Err(Error::NotEnoughRoom {
            needed: wired.len(),
            available: x_prime.n(),
        });
    }
    let offset = x_prime.n();
    if let Some(v) = (0..x_prime.n()).find(|&v| x_prime.degree(v) >= x_prime.degree_bound()) {
        return Err(Error::NoDegreeHeadroom(v));
    }
    if let Some(v) = (0..y.n()).find(|&v| y.degree(v) >= y.degree_bound()) {
        return Err(Error::NoDegreeHeadroom(offset + v));
    }
    let mut targets: Vec<usize> = (0..x_prime.n()).collect();
    targets.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    targets.truncate(wired.len());

    let union = Graph::disjoint_union(&[x_prime, y]);
    let n = union.n();
    let mut edges: Vec<(usize, usize)> = union.edges().collect();
    let matching: Vec<(usize, usize)> = wired
        .iter()
        .zip(&targets)
        .map(|(&yv, &xv)| (xv, offset + yv))
        .collect();
    edges.extend(&matching);
    let mut touched = vec![false; n];
    for &(a, b) in &matching {
        touched[a] = true;
        touched[b] = true;
    }
    let mut loops: Vec<usize> = (0..n).filter(|&v| !touched[v] && !union.has_loop(v)).collect();
    let existing: Vec<usize> = (0..n).filter(|&v| union.has_loop(v)).collect();
    loops.extend(existing);
    loops.sort_unstable();
    let mut g = Graph::with_loops(n, &edges, &loops, union.degree_bound())?;
    for (u, v) in union.edges() {
        if let Some(l) = union.edge_label(u, v) {
            g.set_edge_label(u, v, l.to_string());
        }
    }
    for &(a, b) in &matching {
        g.set_edge_label(a, b, "b");
    }
    Ok(g)
}

/// Predicted Cheeger lower bound `C(1 − 2α)/2` for a glued expander, with
/// `2C = min(h_y, h_x', 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GlueEstimate {
    pub big_c: f64,
    pub alpha: f64,
    /// `None` when `α ≥ 1/2`, where the formula degenerates.
    pub bound: Option<f64>,
}

pub fn glue_estimate(h_y: f64, h_x_prime: f64, alpha: f64) -> GlueEstimate {
    let big_c = h_y.min(h_x_prime).min(2.0) / 2.0;
    GlueEstimate {
        big_c,
        alpha,
        bound: (alpha < 0.5).then(|| big_c * (1.0 - 2.0 * alpha) / 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheeger::cheeger_exact;
    use crate::Ratio;

    #[test]
    fn margulis_small() {
        let g = margulis(2).unwrap();
        assert_eq!(g.n(), 4);
        assert!(g.max_degree() <= 8);
        let g = margulis(8).unwrap();
        assert_eq!(g.n(), 64);
        assert_eq!(g.degree_bound(), 8);
        assert!(g.is_connected());
        assert!(g.degree(0) < 8);
    }

    #[test]
    fn torus_is_six_regular() {
        let g = triangular_torus(5).unwrap();
        assert!((0..25).all(|v| g.degree(v) == 6));
        assert_eq!(g.edge_count(), 75);
        assert!(triangular_torus(3).is_err());
    }

    #[test]
    fn glue_examples() {
        let k4 = complete(4).with_degree_bound(4).unwrap();
        let g = glue_pair(&k4, &k4, 0, 0).unwrap();
        assert_eq!(g.n(), 8);
        assert_eq!(cheeger_exact::<f64>(&g).unwrap().h, Some(Ratio::new(1, 4)));
        assert_eq!(glue_pair(&complete(4), &complete(4), 0, 0), Err(Error::DegreeExceeded { vertex: 0, bound: 3 }));
        let dot = Graph::empty(1, 1);
        let p2 = glue_pair(&dot, &dot, 0, 0).unwrap();
        assert_eq!(p2.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn glued_expander_examples() {
        let k6 = complete(6).with_degree_bound(6).unwrap();
        let c4 = cycle(4).unwrap().with_degree_bound(3).unwrap();
        let all = VertexSet::full(4);
        let g = glued_expander(&k6, &c4, &all, 1).unwrap();
        assert_eq!(g.n(), 10);
        assert_eq!(g.loop_count(), 10);

        let g = glued_expander(&k6, &c4, &VertexSet::new(vec![0, 1]), 1).unwrap();
        assert_eq!(g.edge_count(), 15 + 4 + 2);
        assert_eq!(g.loop_count(), 6);
        assert!((0..6).all(|v| g.degree(v) == 6));
        assert!((6..10).all(|v| g.degree(v) == 3));
        assert_eq!(g.edges().filter(|&(u, v)| g.edge_label(u, v) == Some("b")).count(), 2);
        assert_eq!(glued_expander(&k6, &c4, &all, 1), glued_expander(&k6, &c4, &all, 1));

        assert_eq!(glued_expander(&complete(6), &c4, &all, 1), Err(Error::NoDegreeHeadroom(0)));
        let c8 = cycle(8).unwrap().with_degree_bound(3).unwrap();
        assert_eq!(
            glued_expander(&k6, &c8, &VertexSet::empty(), 0),
            Err(Error::NotEnoughRoom { needed: 8, available: 6 })
        );
        assert_eq!(glue_estimate(1.0, 3.0, 0.5).bound, None);
        assert_eq!(glue_estimate(1.0, 3.0, 0.25).bound, Some(0.125));
    }
}
