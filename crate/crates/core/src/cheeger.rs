//! Cheeger constants: exhaustive search, Fiedler sweeps, and the spectral
//! sandwich `λ₂/2 ≤ h ≤ √(2dλ₂)`.
//!
//! `h = min |∂S| / |S|` over nonempty `S` with `|S| ≤ n/2`. Graphs with at
//! most one vertex have no admissible `S`; their `h` is reported as `None`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::scalar::Real;
use crate::spectral::{algebraic_connectivity, fiedler_vector};
use crate::Ratio;

/// Largest vertex count accepted by the exhaustive search.
pub const EXACT_CAP: usize = 24;

const EIGEN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheegerMethod {
    Exact,
    Sweep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheegerReport<T> {
    pub h: Option<Ratio>,
    pub witness: VertexSet,
    pub method: CheegerMethod,
    /// `λ₂ / 2`
    pub lower_bound: T,
    /// `√(2 d λ₂)` with `d` the graph's degree bound
    pub upper_bound: T,
}

impl<T: Real> CheegerReport<T> {
    pub fn value(&self) -> Option<T> {
        self.h.map(ratio_value)
    }
}

impl<T: Real + Serialize> Serialize for CheegerReport<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CheegerReport", 6)?;
        st.serialize_field("h", &self.h.map(ratio_value::<f64>))?;
        st.serialize_field("h_exact", &self.h.map(|r| format!("{}/{}", r.numer(), r.denom())))?;
        st.serialize_field("witness", &self.witness)?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("lower_bound", &self.lower_bound)?;
        st.serialize_field("upper_bound", &self.upper_bound)?;
        st.end()
    }
}

pub fn ratio_value<T: Real>(r: Ratio) -> T {
    T::from_u64(*r.numer()).unwrap() / T::from_u64(*r.denom()).unwrap()
}

/// Candidate cut `(boundary, size, mask)`, ordered by ratio, then size, then
/// lexicographic vertex list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Cut {
    boundary: u64,
    size: u64,
    mask: u32,
}

impl Cut {
    fn cmp_key(&self, other: &Cut) -> Ordering {
        (self.boundary * other.size)
            .cmp(&(other.boundary * self.size))
            .then(self.size.cmp(&other.size))
            .then_with(|| lex_cmp(self.mask, other.mask))
    }
}

/// Lexicographic order of the sorted vertex lists of two equal-size masks:
/// the set holding the lowest differing vertex comes first.
fn lex_cmp(a: u32, b: u32) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    let low = diff & diff.wrapping_neg();
    if a & low != 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn better(a: Option<Cut>, b: Option<Cut>) -> Option<Cut> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.cmp_key(&x) == Ordering::Less { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Exhaustive minimum of `(|∂T| + out(T)) / |T|` over `1 ≤ |T| ≤ m/2`, where
/// `nbr` are local adjacency masks and `out[v]` counts edges leaving the
/// local vertex set. The scan walks a Gray code over subsets of the first
/// `m − 1` vertices and scores each subset together with its complement.
fn scan(nbr: &[u32], out: &[u32]) -> Option<Cut> {
    let m = nbr.len();
    if m < 2 {
        return None;
    }
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let out_total: u64 = out.iter().map(|&x| x as u64).sum();
    let half = (m / 2) as u64;
    let free = m - 1;
    let total: u64 = 1u64 << free;
    let chunk_bits = free.min(14);
    let chunk: u64 = 1u64 << chunk_bits;
    let chunks = total / chunk;

    let inner_deg: Vec<u64> = nbr.iter().map(|x| x.count_ones() as u64).collect();
    let score = |mask: u32, inner: u64, out_in: u64, best: &mut Option<Cut>| {
        let size = mask.count_ones() as u64;
        if size >= 1 && size <= half {
            *best = better(
                *best,
                Some(Cut {
                    boundary: inner + out_in,
                    size,
                    mask,
                }),
            );
        }
        let comp = full ^ mask;
        let csize = m as u64 - size;
        if csize <= half {
            *best = better(
                *best,
                Some(Cut {
                    boundary: inner + out_total - out_in,
                    size: csize,
                    mask: comp,
                }),
            );
        }
    };

    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let mut mask = (start ^ (start >> 1)) as u32;
            let mut inner: u64 = 0;
            let mut out_in: u64 = 0;
            for v in 0..free {
                if mask >> v & 1 == 1 {
                    inner += (nbr[v] & !mask).count_ones() as u64;
                    out_in += out[v] as u64;
                }
            }
            let mut best = None;
            score(mask, inner, out_in, &mut best);
            for i in start + 1..start + chunk {
                let v = i.trailing_zeros() as usize;
                let bit = 1u32 << v;
                let common = (nbr[v] & mask & !bit).count_ones() as u64;
                if mask & bit == 0 {
                    inner = inner + inner_deg[v] - 2 * common;
                    out_in += out[v] as u64;
                } else {
                    inner = inner + 2 * common - inner_deg[v];
                    out_in -= out[v] as u64;
                }
                mask ^= bit;
                score(mask, inner, out_in, &mut best);
            }
            best
        })
        .reduce(|| None, better)
}

fn bounds<T: Real>(g: &Graph) -> Result<(T, T)> {
    let l2: T = algebraic_connectivity(g, T::lit(EIGEN_TOL).max(T::epsilon().sqrt()))?;
    let l2 = l2.max(T::zero());
    let d = T::from_count(g.degree_bound());
    Ok((l2 / T::lit(2.0), (T::lit(2.0) * d * l2).sqrt()))
}

/// Smallest component (lexicographic on ties) of a disconnected graph.
fn smallest_component(g: &Graph) -> VertexSet {
    g.connected_components()
        .into_iter()
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
        .unwrap()
}

fn report<T: Real>(
    g: &Graph,
    h: Option<Ratio>,
    witness: VertexSet,
    method: CheegerMethod,
) -> Result<CheegerReport<T>> {
    let (lower_bound, upper_bound) = bounds(g)?;
    Ok(CheegerReport {
        h,
        witness,
        method,
        lower_bound,
        upper_bound,
    })
}

/// Exact Cheeger constant. Disconnected graphs of any size give `h = 0`
/// with the smallest component as witness; connected graphs need
/// `n ≤ EXACT_CAP`.
pub fn cheeger_exact<T: Real>(g: &Graph) -> Result<CheegerReport<T>> {
    let n = g.n();
    if n <= 1 {
        return report(g, None, VertexSet::empty(), CheegerMethod::Exact);
    }
    if !g.is_connected() {
        return report(g, Some(Ratio::from_integer(0)), smallest_component(g), CheegerMethod::Exact);
    }
    if n > EXACT_CAP {
        return Err(Error::TooLargeForExact(n));
    }
    let nbr = local_masks(g, &VertexSet::full(n));
    let cut = scan(&nbr, &vec![0; n]).expect("n ≥ 2");
    report(
        g,
        Some(Ratio::new(cut.boundary, cut.size)),
        mask_to_set(cut.mask, &(0..n).collect::<Vec<_>>()),
        CheegerMethod::Exact,
    )
}

/// Exact inner-expansion constant of `piece` inside `g`: the minimum of
/// `|∂_g T| / |T|` over `T ⊆ piece` with `1 ≤ |T| ≤ |piece|/2`, boundaries
/// counted in the whole graph. `None` when `|piece| ≤ 1`.
pub fn inner_expansion_exact(g: &Graph, piece: &VertexSet) -> Result<Option<(Ratio, VertexSet)>> {
    piece.check_range(g.n())?;
    let m = piece.len();
    if m > EXACT_CAP {
        return Err(Error::TooLargeForExact(m));
    }
    let nbr = local_masks(g, piece);
    let out: Vec<u32> = piece
        .iter()
        .enumerate()
        .map(|(i, v)| (g.simple_degree(v) - nbr[i].count_ones() as usize) as u32)
        .collect();
    Ok(scan(&nbr, &out).map(|c| {
        (
            Ratio::new(c.boundary, c.size),
            mask_to_set(c.mask, piece.as_slice()),
        )
    }))
}

fn local_masks(g: &Graph, set: &VertexSet) -> Vec<u32> {
    let mut local = vec![usize::MAX; g.n()];
    for (i, v) in set.iter().enumerate() {
        local[v] = i;
    }
    set.iter()
        .map(|v| {
            g.neighbors(v)
                .iter()
                .filter(|&&w| local[w] != usize::MAX)
                .fold(0u32, |acc, &w| acc | 1 << local[w])
        })
        .collect()
}

fn mask_to_set(mask: u32, vertices: &[usize]) -> VertexSet {
    VertexSet::new(
        (0..vertices.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| vertices[i])
            .collect(),
    )
}

/// Proper prefixes of the vertex order given by `values`, ties by index.
pub(crate) fn sweep_cuts<T: Real>(g: &Graph, values: &[T]) -> Vec<VertexSet> {
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    (1..n).map(|k| VertexSet::new(order[..k].to_vec())).collect()
}

/// Fiedler sweep: an upper bound on `h` with an explicit witness.
pub fn cheeger_sweep<T: Real>(g: &Graph) -> Result<CheegerReport<T>> {
    let n = g.n();
    if n <= 1 {
        return report(g, None, VertexSet::empty(), CheegerMethod::Sweep);
    }
    if !g.is_connected() {
        return report(g, Some(Ratio::from_integer(0)), smallest_component(g), CheegerMethod::Sweep);
    }
    let tol = T::lit(EIGEN_TOL).max(T::epsilon().sqrt());
    let (l2, vector) = fiedler_vector::<T>(g, tol)?;
    let mut best: Option<(u64, u64, VertexSet)> = None;
    for prefix in sweep_cuts(g, &vector) {
        let b = g.boundary_size(&prefix)? as u64;
        let comp = prefix.complement(n);
        let side = match prefix.len().cmp(&comp.len()) {
            Ordering::Less => prefix,
            Ordering::Greater => comp,
            Ordering::Equal => prefix.min(comp),
        };
        let s = side.len() as u64;
        let replace = match &best {
            None => true,
            Some((bb, bs, bw)) => (b * bs, s, &side) < (bb * s, *bs, bw),
        };
        if replace {
            best = Some((b, s, side));
        }
    }
    let (b, s, witness) = best.expect("n ≥ 2");
    let l2 = l2.max(T::zero());
    let d = T::from_count(g.degree_bound());
    Ok(CheegerReport {
        h: Some(Ratio::new(b, s)),
        witness,
        method: CheegerMethod::Sweep,
        lower_bound: l2 / T::lit(2.0),
        upper_bound: (T::lit(2.0) * d * l2).sqrt(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichCheck<T> {
    pub lambda2: T,
    pub h: Option<T>,
    pub method: CheegerMethod,
    /// `λ₂/2 − tol ≤ h`; `None` when `h` comes from a sweep.
    pub lower_holds: Option<bool>,
    pub upper_holds: bool,
}

impl<T> SandwichCheck<T> {
    pub fn holds(&self) -> bool {
        self.upper_holds && self.lower_holds.unwrap_or(true)
    }
}

/// Checks the discrete Cheeger inequality. Uses the exact constant when
/// `exact` is set (failing with `TooLargeForExact` on big connected
/// graphs), else the sweep value, for which only the upper side is a
/// meaningful test.
pub fn cheeger_sandwich_check<T: Real>(g: &Graph, exact: bool, tol: T) -> Result<SandwichCheck<T>> {
    let r: CheegerReport<T> = if exact {
        cheeger_exact(g)?
    } else {
        cheeger_sweep(g)?
    };
    let lambda2 = T::lit(2.0) * r.lower_bound;
    let h = r.value();
    let upper_holds = h.is_none_or(|h| h <= r.upper_bound + tol);
    let lower_holds = exact.then(|| h.is_none_or(|h| r.lower_bound - tol <= h));
    Ok(SandwichCheck {
        lambda2,
        h,
        method: r.method,
        lower_holds,
        upper_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn cycle(n: usize) -> Graph {
        build_graph(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>(), 2).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        build_graph(n, &e, n - 1).unwrap()
    }

    fn bridged_k4() -> Graph {
        let k4 = complete(4).with_degree_bound(4).unwrap();
        let u = Graph::disjoint_union(&[&k4, &k4]);
        u.edited(&[], &[(0, 4)]).unwrap()
    }

    fn r(a: u64, b: u64) -> Option<Ratio> {
        Some(Ratio::new(a, b))
    }

    #[test]
    fn exact_examples() {
        let c = cheeger_exact::<f64>(&cycle(4)).unwrap();
        assert_eq!(c.h, r(1, 1));
        assert_eq!(c.witness.as_slice(), &[0, 1]);
        let k = cheeger_exact::<f64>(&complete(4)).unwrap();
        assert_eq!(k.h, r(2, 1));
        assert_eq!(k.witness.as_slice(), &[0, 1]);
        let t = complete(3);
        let two = Graph::disjoint_union(&[&t, &t]);
        let c = cheeger_exact::<f64>(&two).unwrap();
        assert_eq!(c.h, r(0, 1));
        assert_eq!(c.witness.as_slice(), &[0, 1, 2]);
        assert_eq!(cheeger_exact::<f64>(&cycle(8)).unwrap().h, r(1, 2));
    }

    #[test]
    fn exact_prefers_smaller_sets_on_ties() {
        // C_6: arcs of 2 and 3 vertices both have boundary 2; ratio 1 vs 2/3
        assert_eq!(cheeger_exact::<f64>(&cycle(6)).unwrap().h, r(2, 3));
        // path 0-1-2-3: {0} ratio 1, {0,1} ratio 1/2
        let p = build_graph(4, &[(0, 1), (1, 2), (2, 3)], 2).unwrap();
        let c = cheeger_exact::<f64>(&p).unwrap();
        assert_eq!((c.h, c.witness.as_slice()), (r(1, 2), &[0, 1][..]));
    }

    #[test]
    fn exact_degenerate_and_cap() {
        let one = cheeger_exact::<f64>(&Graph::empty(1, 1)).unwrap();
        assert_eq!(one.h, None);
        assert!(matches!(
            cheeger_exact::<f64>(&cycle(25)),
            Err(Error::TooLargeForExact(25))
        ));
        // disconnected graphs are exact at any size
        let big = Graph::disjoint_union(&[&cycle(20), &cycle(10)]);
        let c = cheeger_exact::<f64>(&big).unwrap();
        assert_eq!(c.h, r(0, 1));
        assert_eq!(c.witness.len(), 10);
    }

    #[test]
    fn sweep_examples() {
        assert_eq!(cheeger_sweep::<f64>(&cycle(4)).unwrap().h, r(1, 1));
        assert_eq!(cheeger_sweep::<f64>(&complete(4)).unwrap().h, r(2, 1));
        let s = cheeger_sweep::<f64>(&bridged_k4()).unwrap();
        assert_eq!(s.h, r(1, 4));
        assert_eq!(s.witness.len(), 4);
        assert_eq!(cheeger_exact::<f64>(&bridged_k4()).unwrap().h, r(1, 4));
    }

    #[test]
    fn sandwich_examples() {
        let k4 = cheeger_sandwich_check::<f64>(&complete(4), true, 1e-9).unwrap();
        assert!(k4.holds());
        assert!((k4.lambda2 - 4.0).abs() < 1e-9);
        let c8 = cheeger_sandwich_check::<f64>(&cycle(8), true, 1e-9).unwrap();
        assert!(c8.holds());
        assert_eq!(c8.h, Some(0.5));
        let e = cheeger_sandwich_check::<f64>(&Graph::empty(3, 1), true, 1e-9).unwrap();
        assert!(e.holds());
        assert_eq!((e.h, e.lambda2), (Some(0.0), 0.0));
    }

    #[test]
    fn inner_expansion_counts_outside_edges() {
        // piece {0,1,2} of a path 0-1-2-3: T = {0} has ∂ = 1
        let p = build_graph(4, &[(0, 1), (1, 2), (2, 3)], 2).unwrap();
        let (h, w) = inner_expansion_exact(&p, &VertexSet::new(vec![0, 1, 2])).unwrap().unwrap();
        assert_eq!((h, w.as_slice()), (Ratio::new(1, 1), &[0][..]));
        // {2} also has ratio 2 inside the piece: 1 inside + 1 outside edge
        let (h, _) = inner_expansion_exact(&p, &VertexSet::new(vec![1, 2])).unwrap().unwrap();
        assert_eq!(h, Ratio::new(2, 1));
        assert!(inner_expansion_exact(&p, &VertexSet::singleton(3)).unwrap().is_none());
    }

    #[test]
    fn witness_reproduces_value() {
        for g in [cycle(9), complete(5), bridged_k4()] {
            let c = cheeger_exact::<f64>(&g).unwrap();
            let b = g.boundary_size(&c.witness).unwrap() as u64;
            assert_eq!(c.h, r(b, c.witness.len() as u64));
        }
    }

    #[test]
    fn report_serializes() {
        let c = cheeger_exact::<f64>(&cycle(8)).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["h"], 0.5);
        assert_eq!(v["h_exact"], "1/2");
        assert_eq!(v["method"], "exact");
        let one = serde_json::to_value(cheeger_exact::<f64>(&Graph::empty(1, 1)).unwrap()).unwrap();
        assert!(one["h"].is_null());
    }
}
