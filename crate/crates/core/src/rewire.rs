//! Detaching inner-expanding pieces by rewiring their boundary edges, and
//! the full expanderize pipeline built on it.

use rayon::prelude::*;
use serde::Serialize;

use crate::cheeger::{cheeger_exact, inner_expansion_exact, ratio_value, EXACT_CAP};
use crate::decompose::{kun_partition, piece_evidence, Evidence, KunParams, PartitionCertificate};
use crate::error::{Error, Result};
use crate::generators::approx_iso::{ApproxIsoWitness, IndexWitness};
use crate::graph::{BoxSpace, Graph, VertexSet};

/// Separation radius `⌈4/C⌉`.
pub fn separation_radius(big_c: f64) -> usize {
    (4.0 / big_c).ceil() as usize
}

/// Rewiring feasibility condition `α < 1/d^{r+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Feasibility {
    pub r: usize,
    pub bound: f64,
    pub feasible: bool,
}

pub fn feasibility(alpha: f64, big_c: f64, d: usize) -> Feasibility {
    let r = separation_radius(big_c);
    let bound = (d as f64).powf(-((r + 1) as f64));
    Feasibility {
        r,
        bound,
        feasible: alpha < bound,
    }
}

/// Endpoints inside `piece` of its boundary edges.
fn boundary_endpoints(g: &Graph, piece: &VertexSet) -> Result<VertexSet> {
    Ok(g.boundary_edges(piece)?.into_iter().map(|(x, _)| x).collect())
}

/// Greedy choice of `count` edges inside `piece`, pairwise at graph distance
/// at least `2r`, none touching or adjacent to an endpoint of `∂piece`.
/// Candidates are scanned in `(min, max)` endpoint order.
pub fn select_separated_edges(
    g: &Graph,
    piece: &VertexSet,
    r: usize,
    count: usize,
) -> Result<Vec<(usize, usize)>> {
    piece.check_range(g.n())?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let q = boundary_endpoints(g, piece)?;
    let mut forbidden = q.mask(g.n());
    for x in q.iter() {
        for &w in g.neighbors(x) {
            forbidden[w] = true;
        }
    }
    let inside = piece.mask(g.n());
    let mut dist: Vec<Option<usize>> = vec![None; g.n()];
    let mut chosen = Vec::with_capacity(count);
    for (u, v) in g.edges() {
        if !inside[u] || !inside[v] || forbidden[u] || forbidden[v] {
            continue;
        }
        let far = |x: usize| dist[x].is_none_or(|dx| dx >= 2 * r);
        if !far(u) || !far(v) {
            continue;
        }
        chosen.push((u, v));
        if chosen.len() == count {
            return Ok(chosen);
        }
        let fresh = g.distances_from(&[u, v], Some(2 * r));
        for (d, f) in dist.iter_mut().zip(fresh) {
            if let Some(f) = f {
                *d = Some(d.map_or(f, |x| x.min(f)));
            }
        }
    }
    Err(Error::InsufficientSeparatedEdges {
        found: chosen.len(),
        needed: count,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", content = "data", rename_all = "snake_case")]
pub enum Edit {
    Add((usize, usize)),
    Remove((usize, usize)),
    RemoveVertex(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// Exhaustively checked: every `T ⊆ P` with `|T| ≤ |P|/2` has `|∂T| ≥ C|T|`.
    Verified,
    /// Piece too large for the exhaustive check.
    Assumed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Budget {
    pub added_edges: usize,
    pub removed_edges: usize,
    pub removed_vertices: usize,
    /// `α|P|`, applied to added and to removed edges separately.
    pub edge_limit: f64,
    /// `(α/C)|P|`
    pub vertex_limit: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RewireResult {
    #[serde(skip)]
    pub new_graph: Graph,
    /// The piece after removing detached vertices.
    pub piece: VertexSet,
    pub edits: Vec<Edit>,
    pub removed_vertices: VertexSet,
    pub r: usize,
    pub feasibility: Feasibility,
    pub hypothesis: Hypothesis,
    pub budget: Budget,
    /// Inner expansion of the new piece against `C/6`.
    pub cheeger_evidence: Evidence,
}

/// Rewires the boundary of `piece` into the piece itself.
///
/// Each boundary edge `(x, y)` with `x ∈ P` is paired with a separated edge
/// `e ∈ F`; both are removed and `x` is joined to `e⁺`, the endpoint of `e`
/// lying in the larger component of `G[P] − e` (the smaller index on ties).
/// Vertices of `P` that end up disconnected from every `e⁺` are isolated and
/// dropped from the piece. Vertex indices are preserved.
pub fn rewire_piece(g: &Graph, piece: &VertexSet, big_c: f64, alpha: f64) -> Result<RewireResult> {
    piece.check_range(g.n())?;
    if !(big_c > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidArgument("C and alpha must be positive".into()));
    }
    let hypothesis = if piece.len() <= EXACT_CAP {
        if let Some((h, witness)) = inner_expansion_exact(g, piece)? {
            if ratio_value::<f64>(h) < big_c {
                let boundary = g.boundary_size(&witness)?;
                return Err(Error::HypothesisFailed { witness: witness.into_vec(), boundary });
            }
        }
        Hypothesis::Verified
    } else {
        Hypothesis::Assumed
    };
    let boundary = g.boundary_edges(piece)?;
    let limit = alpha * piece.len() as f64;
    if boundary.len() as f64 >= limit {
        return Err(Error::BoundaryBudgetExceeded {
            boundary: boundary.len(),
            limit,
        });
    }
    let feas = feasibility(alpha, big_c, g.degree_bound());
    let r = feas.r;
    let f_edges = select_separated_edges(g, piece, r, boundary.len())?;

    let (sub, index) = g.induced_subgraph(piece)?;
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in index.iter().enumerate() {
        local[v] = i;
    }
    let mut added = Vec::with_capacity(boundary.len());
    let mut plus = Vec::with_capacity(boundary.len());
    let mut minus = Vec::with_capacity(boundary.len());
    for (&(x, _), &(a, b)) in boundary.iter().zip(&f_edges) {
        let cut = sub.edited(&[(local[a], local[b])], &[])?;
        let labels = cut.component_labels();
        let size = |v: usize| labels.iter().filter(|&&l| l == labels[local[v]]).count();
        let (sa, sb) = (size(a), size(b));
        let (ep, em) = if sa > sb || (sa == sb && a < b) { (a, b) } else { (b, a) };
        added.push((x.min(ep), x.max(ep)));
        plus.push(ep);
        minus.push(em);
    }
    let mut removed: Vec<(usize, usize)> = boundary.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
    removed.extend(f_edges.iter().copied());
    let mut new_graph = g.edited(&removed, &added)?;

    // Drop the parts of P no longer attached to any e⁺.
    let (new_sub, _) = new_graph.induced_subgraph(piece)?;
    let labels = new_sub.component_labels();
    let anchor_labels: Vec<usize> = plus.iter().map(|&v| labels[local[v]]).collect();
    let detached_labels: Vec<usize> = minus
        .iter()
        .map(|&v| labels[local[v]])
        .filter(|&l| !anchor_labels.contains(&l))
        .collect();
    let detached: VertexSet = (0..new_sub.n())
        .filter(|&i| detached_labels.contains(&labels[i]))
        .map(|i| index[i])
        .collect();
    if !detached.is_empty() {
        new_graph = new_graph.isolate(&detached);
    }
    let new_piece = piece.difference(&detached);
    debug_assert_eq!(new_graph.boundary_size(&new_piece).unwrap_or(1), 0);

    let mut edits: Vec<Edit> = removed.iter().map(|&e| Edit::Remove(e)).collect();
    edits.extend(added.iter().map(|&e| Edit::Add(e)));
    edits.extend(detached.iter().map(Edit::RemoveVertex));

    let vertex_limit = alpha / big_c * piece.len() as f64;
    let budget = Budget {
        added_edges: added.len(),
        removed_edges: removed.len(),
        removed_vertices: detached.len(),
        edge_limit: limit,
        vertex_limit,
        within: added.len() as f64 <= limit
            && removed.len() as f64 <= limit
            && detached.len() as f64 <= vertex_limit,
    };
    let cheeger_evidence = piece_evidence(&new_graph, &new_piece, big_c / 6.0, EXACT_CAP)?;
    Ok(RewireResult {
        new_graph,
        piece: new_piece,
        edits,
        removed_vertices: detached,
        r,
        feasibility: feas,
        hypothesis,
        budget,
        cheeger_evidence,
    })
}

/// Exact Cheeger constant of the induced graph on `piece`, as `f64`.
pub fn piece_cheeger(g: &Graph, piece: &VertexSet) -> Result<Option<f64>> {
    let (sub, _) = g.induced_subgraph(piece)?;
    Ok(cheeger_exact::<f64>(&sub)?.value())
}

/// Per-graph outcome of [`expanderize`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphReport {
    pub index: usize,
    pub n: usize,
    pub output_n: usize,
    pub pieces: usize,
    pub rewired: Vec<RewireResult>,
    pub certificate: PartitionCertificate,
    /// Final junk fraction: partition junk, vertices detached by rewiring and
    /// pieces whose rewiring failed.
    pub junk_ratio: f64,
    pub small_component_ratio: f64,
    pub retention: f64,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    pub kept: VertexSet,
}

#[derive(Clone, Debug)]
pub struct ExpanderizeOutput {
    pub space: BoxSpace,
    pub witness: ApproxIsoWitness,
    pub reports: Vec<GraphReport>,
}

/// Decomposes every graph, rewires every piece, drops the junk and all
/// components with fewer than `min_component` vertices. Graphs are handled
/// in parallel; failures inside one graph become diagnostics.
pub fn expanderize(x: &BoxSpace, p: &KunParams, min_component: usize, exact_cap: usize) -> Result<ExpanderizeOutput> {
    let results: Vec<(Graph, IndexWitness, GraphReport)> = x
        .graphs()
        .par_iter()
        .enumerate()
        .map(|(i, g)| expanderize_one(i, g, p, min_component, exact_cap))
        .collect::<Result<_>>()?;
    let mut graphs = Vec::with_capacity(results.len());
    let mut entries = Vec::with_capacity(results.len());
    let mut reports = Vec::with_capacity(results.len());
    for (g, w, r) in results {
        graphs.push(g);
        entries.push(w);
        reports.push(r);
    }
    Ok(ExpanderizeOutput {
        space: BoxSpace::new(graphs, x.labels().to_vec(), x.degree_bound())?,
        witness: ApproxIsoWitness { entries },
        reports,
    })
}

fn expanderize_one(
    index: usize,
    g: &Graph,
    p: &KunParams,
    min_component: usize,
    exact_cap: usize,
) -> Result<(Graph, IndexWitness, GraphReport)> {
    let n = g.n();
    let (dec, certificate) = kun_partition(g, p, exact_cap)?;
    let mut diagnostics = Vec::new();
    let mut working = g.clone();
    let mut rewired = Vec::new();
    let mut kept_mask = vec![false; n];
    let mut touched = vec![false; n];
    for (k, piece) in dec.pieces.iter().enumerate() {
        match rewire_piece(&working, piece, p.big_c(), p.alpha()) {
            Ok(res) => {
                for e in &res.edits {
                    if let Edit::Add((u, v)) = e {
                        touched[*u] = true;
                        touched[*v] = true;
                    }
                }
                for v in res.piece.iter() {
                    kept_mask[v] = true;
                }
                working = res.new_graph.clone();
                rewired.push(res);
            }
            Err(e) => diagnostics.push(format!("piece {k} ({} vertices) moved to junk: {e}", piece.len())),
        }
    }
    let kept = VertexSet::from_mask(&kept_mask);
    let junk_count = n - kept.len();

    let (pre, pre_index) = working.induced_subgraph(&kept)?;
    let mut small = 0;
    let mut survivors = Vec::new();
    for comp in pre.connected_components() {
        if comp.len() < min_component {
            small += comp.len();
        } else {
            survivors.extend(comp.iter().map(|i| pre_index[i]));
        }
    }
    let survivors = VertexSet::new(survivors);
    let (out, out_index) = working.induced_subgraph(&survivors)?;

    // Witness: survivors untouched by added edges, checked edge by edge.
    let mut y: Vec<usize> = survivors.iter().filter(|&v| !touched[v]).collect();
    loop {
        let set = VertexSet::new(y.clone());
        let mask = set.mask(n);
        let bad = set.iter().find(|&v| {
            let a: Vec<usize> = g.neighbors(v).iter().copied().filter(|&w| mask[w]).collect();
            let b: Vec<usize> = working.neighbors(v).iter().copied().filter(|&w| mask[w]).collect();
            a != b
        });
        match bad {
            Some(v) => y.retain(|&w| w != v),
            None => break,
        }
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in out_index.iter().enumerate() {
        pos[v] = i;
    }
    let witness = IndexWitness {
        y: VertexSet::new(y.clone()),
        y_prime: VertexSet::new(y.iter().map(|&v| pos[v]).collect()),
        map: y.iter().map(|&v| pos[v]).collect(),
    };
    let nf = n.max(1) as f64;
    let report = GraphReport {
        index,
        n,
        output_n: out.n(),
        pieces: dec.pieces.len(),
        rewired,
        certificate,
        junk_ratio: junk_count as f64 / nf,
        small_component_ratio: small as f64 / nf,
        retention: if n == 0 { 1.0 } else { out.n() as f64 / nf },
        diagnostics,
        kept: survivors,
    };
    Ok((out, witness, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn cycle(n: usize, d: usize) -> Graph {
        build_graph(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>(), d).unwrap()
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

    #[test]
    fn select_examples() {
        let c20 = cycle(20, 2);
        let all = VertexSet::full(20);
        assert_eq!(select_separated_edges(&c20, &all, 2, 0).unwrap(), vec![]);
        let f = select_separated_edges(&c20, &all, 2, 2).unwrap();
        assert_eq!(f, vec![(0, 1), (5, 6)]);
        let dist = c20.distances_from(&[0, 1], None);
        assert!(dist[5].unwrap() >= 4 && dist[6].unwrap() >= 4);

        // K4 whose every vertex has an outside neighbour
        let mut e: Vec<(usize, usize)> = Vec::new();
        for u in 0..4 {
            for v in u + 1..4 {
                e.push((u, v));
            }
            e.push((u, u + 4));
        }
        let g = build_graph(8, &e, 4).unwrap();
        let err = select_separated_edges(&g, &VertexSet::new(vec![0, 1, 2, 3]), 1, 1).unwrap_err();
        assert_eq!(err, Error::InsufficientSeparatedEdges { found: 0, needed: 1 });
    }

    #[test]
    fn empty_boundary_is_identity() {
        let g = complete(5);
        let res = rewire_piece(&g, &VertexSet::full(5), 0.5, 0.1).unwrap();
        assert_eq!(res.new_graph, g);
        assert!(res.edits.is_empty());
        assert_eq!(res.piece, VertexSet::full(5));
    }

    #[test]
    fn cycle_with_pendant() {
        let mut e: Vec<(usize, usize)> = (0..20).map(|i| (i, (i + 1) % 20)).collect();
        e.push((0, 20));
        let g = build_graph(21, &e, 3).unwrap();
        let piece = VertexSet::new((0..20).collect());
        let (h, _) = inner_expansion_exact(&g, &piece).unwrap().unwrap();
        assert_eq!(h, crate::Ratio::new(1, 5));
        let res = rewire_piece(&g, &piece, 0.2, 0.1).unwrap();
        assert_eq!(res.r, 20);
        assert_eq!(
            res.edits,
            vec![Edit::Remove((0, 20)), Edit::Remove((2, 3)), Edit::Add((0, 2))]
        );
        assert_eq!(res.new_graph.boundary_size(&res.piece).unwrap(), 0);
        assert_eq!(res.piece.len(), 20);
        let post = piece_cheeger(&res.new_graph, &res.piece).unwrap().unwrap();
        assert!(post >= 0.2 / 6.0);
        assert_eq!(res.cheeger_evidence.value, Some(post));
        assert_eq!(res.hypothesis, Hypothesis::Verified);
    }

    #[test]
    fn hypothesis_failure_names_a_triangle() {
        let g = build_graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)], 3).unwrap();
        let err = rewire_piece(&g, &VertexSet::full(6), 0.5, 0.1).unwrap_err();
        assert_eq!(
            err,
            Error::HypothesisFailed {
                witness: vec![0, 1, 2],
                boundary: 1
            }
        );
    }

    #[test]
    fn budget_exceeded() {
        let mut e: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        e.push((0, 6));
        let g = build_graph(7, &e, 3).unwrap();
        let err = rewire_piece(&g, &VertexSet::new((0..6).collect()), 0.1, 0.1).unwrap_err();
        assert!(matches!(err, Error::BoundaryBudgetExceeded { boundary: 1, .. }));
    }

    #[test]
    fn matching_instance_detaches() {
        // u=0, v=1 inside, q=2 matched to z=3 outside
        let g = build_graph(4, &[(0, 1), (2, 3)], 1).unwrap();
        let piece = VertexSet::new(vec![0, 1, 2]);
        let res = rewire_piece(&g, &piece, 1.0, 0.8).unwrap();
        assert_eq!(res.edits, vec![
            Edit::Remove((2, 3)),
            Edit::Remove((0, 1)),
            Edit::Add((0, 2)),
            Edit::RemoveVertex(1),
        ]);
        assert_eq!(res.piece.as_slice(), &[0, 2]);
        assert!(res.feasibility.feasible && res.budget.within);
        assert!(res.new_graph.max_degree() <= 1);
    }

    #[test]
    fn expanderize_identity_on_complete_graphs() {
        let k6 = complete(6);
        let two = Graph::disjoint_union(&[&k6, &k6]);
        let space = BoxSpace::from_graphs(vec![k6.clone(), two.clone()]);
        let p = KunParams::new(6.0, 5, 0.1).unwrap();
        let out = expanderize(&space, &p, 1, 24).unwrap();
        assert_eq!(out.space.graphs(), &[k6, two]);
        for w in &out.witness.entries {
            assert_eq!(w.y, w.y_prime);
        }
        assert!(out.reports.iter().all(|r| r.retention == 1.0));
    }
}
