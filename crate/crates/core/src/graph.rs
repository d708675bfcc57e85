//! Immutable bounded-degree graphs, vertex sets and box spaces.
//!
//! Adjacency lists are sorted and symmetric. Self-loops are stored apart
//! from the adjacency lists: they count one towards a vertex's degree but
//! never appear in boundaries, balls or Laplacians.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted, duplicate-free list of vertex indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        VertexSet(vertices)
    }

    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn singleton(v: usize) -> Self {
        VertexSet(vec![v])
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        VertexSet(
            mask.iter()
                .enumerate()
                .filter_map(|(v, &m)| m.then_some(v))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&v) if v >= n => Err(Error::VertexOutOfRange { vertex: v, n }),
            _ => Ok(()),
        }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::new(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    pub fn symmetric_difference(&self, other: &VertexSet) -> VertexSet {
        self.difference(other).union(&other.difference(self))
    }

    pub fn complement(&self, n: usize) -> VertexSet {
        VertexSet((0..n).filter(|&v| !self.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        VertexSet::new(v)
    }
}

/// Finite undirected graph with a degree bound, possibly disconnected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    loops: Vec<bool>,
    degree_bound: usize,
    edge_labels: BTreeMap<(usize, usize), String>,
}

/// Builds a simple graph from an edge list. Rejects loops.
pub fn build_graph(n: usize, edges: &[(usize, usize)], d: usize) -> Result<Graph> {
    Graph::new(n, edges, d)
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)], d: usize) -> Result<Graph> {
        if let Some(&(u, _)) = edges.iter().find(|(u, v)| u == v) {
            return Err(Error::LoopNotAllowed(u));
        }
        Graph::with_loops(n, edges, &[], d)
    }

    /// Like [`Graph::new`], but `(v, v)` pairs in `edges` and the entries of
    /// `loops` attach a self-loop to `v`.
    pub fn with_loops(
        n: usize,
        edges: &[(usize, usize)],
        loops: &[usize],
        d: usize,
    ) -> Result<Graph> {
        let mut adjacency = vec![Vec::new(); n];
        let mut loop_flags = vec![false; n];
        let check = |v: usize| {
            if v >= n {
                Err(Error::VertexOutOfRange { vertex: v, n })
            } else {
                Ok(())
            }
        };
        for &(u, v) in edges {
            check(u)?;
            check(v)?;
            if u == v {
                if loop_flags[u] {
                    return Err(Error::DuplicateEdge(u, u));
                }
                loop_flags[u] = true;
            } else {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for &v in loops {
            check(v)?;
            if loop_flags[v] {
                return Err(Error::DuplicateEdge(v, v));
            }
            loop_flags[v] = true;
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        let g = Graph {
            adjacency,
            loops: loop_flags,
            degree_bound: d,
            edge_labels: BTreeMap::new(),
        };
        if let Some(v) = (0..n).find(|&v| g.degree(v) > d) {
            return Err(Error::DegreeExceeded { vertex: v, bound: d });
        }
        Ok(g)
    }

    pub fn empty(n: usize, d: usize) -> Graph {
        Graph {
            adjacency: vec![Vec::new(); n],
            loops: vec![false; n],
            degree_bound: d,
            edge_labels: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Same graph with a different degree bound.
    pub fn with_degree_bound(mut self, d: usize) -> Result<Graph> {
        let max_degree = self.max_degree();
        if max_degree > d {
            return Err(Error::DegreeBoundTooSmall { bound: d, max_degree });
        }
        self.degree_bound = d;
        Ok(self)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_loop(&self, v: usize) -> bool {
        self.loops[v]
    }

    pub fn allows_loops(&self) -> bool {
        self.loops.iter().any(|&l| l)
    }

    pub fn loop_count(&self) -> usize {
        self.loops.iter().filter(|&&l| l).count()
    }

    /// Degree including a self-loop, if any.
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len() + usize::from(self.loops[v])
    }

    /// Degree ignoring self-loops; this is what the Laplacian sees.
    pub fn simple_degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            return self.loops[u];
        }
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Non-loop edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn set_edge_label(&mut self, u: usize, v: usize, label: impl Into<String>) {
        self.edge_labels.insert((u.min(v), u.max(v)), label.into());
    }

    pub fn edge_label(&self, u: usize, v: usize) -> Option<&str> {
        self.edge_labels.get(&(u.min(v), u.max(v))).map(String::as_str)
    }

    /// Number of edges with exactly one endpoint in `set`.
    pub fn boundary_size(&self, set: &VertexSet) -> Result<usize> {
        set.check_range(self.n())?;
        let mask = set.mask(self.n());
        Ok(self.boundary_size_mask(&mask))
    }

    pub(crate) fn boundary_size_mask(&self, mask: &[bool]) -> usize {
        (0..self.n())
            .filter(|&v| mask[v])
            .map(|v| self.adjacency[v].iter().filter(|&&w| !mask[w]).count())
            .sum()
    }

    /// Boundary edges as `(inside, outside)` pairs, sorted.
    pub fn boundary_edges(&self, set: &VertexSet) -> Result<Vec<(usize, usize)>> {
        set.check_range(self.n())?;
        let mask = set.mask(self.n());
        Ok(set
            .iter()
            .flat_map(|v| {
                self.adjacency[v]
                    .iter()
                    .filter(|&&w| !mask[w])
                    .map(move |&w| (v, w))
                    .collect::<Vec<_>>()
            })
            .collect())
    }

    pub fn ball(&self, center: usize, r: usize) -> Result<VertexSet> {
        self.ball_of_set(&VertexSet::singleton(center), r)
    }

    /// All vertices within graph distance `r` of `set`.
    pub fn ball_of_set(&self, set: &VertexSet, r: usize) -> Result<VertexSet> {
        set.check_range(self.n())?;
        let dist = self.distances_from(set.as_slice(), Some(r));
        Ok(VertexSet(
            (0..self.n()).filter(|&v| dist[v].is_some()).collect(),
        ))
    }

    /// Multi-source BFS distances, truncated at `limit` when given.
    pub fn distances_from(&self, sources: &[usize], limit: Option<usize>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap();
            if limit.is_some_and(|l| dv >= l) {
                continue;
            }
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Components ordered by their smallest vertex.
    pub fn connected_components(&self) -> Vec<VertexSet> {
        let labels = self.component_labels();
        let count = labels.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut parts = vec![Vec::new(); count];
        for (v, &c) in labels.iter().enumerate() {
            parts[c].push(v);
        }
        parts.into_iter().map(VertexSet).collect()
    }

    /// Component index of each vertex, numbered in order of first vertex.
    pub fn component_labels(&self) -> Vec<usize> {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Induced subgraph on `set`, re-indexed `0..|set|`, with the map from
    /// new indices back to vertices of `self`.
    pub fn induced_subgraph(&self, set: &VertexSet) -> Result<(Graph, Vec<usize>)> {
        set.check_range(self.n())?;
        let index_map = set.as_slice().to_vec();
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in index_map.iter().enumerate() {
            local[v] = i;
        }
        let adjacency = index_map
            .iter()
            .map(|&v| {
                self.adjacency[v]
                    .iter()
                    .filter(|&&w| local[w] != usize::MAX)
                    .map(|&w| local[w])
                    .collect()
            })
            .collect();
        let loops = index_map.iter().map(|&v| self.loops[v]).collect();
        let edge_labels = self
            .edge_labels
            .iter()
            .filter(|((u, v), _)| local[*u] != usize::MAX && local[*v] != usize::MAX)
            .map(|(&(u, v), l)| ((local[u].min(local[v]), local[u].max(local[v])), l.clone()))
            .collect();
        Ok((
            Graph {
                adjacency,
                loops,
                degree_bound: self.degree_bound,
                edge_labels,
            },
            index_map,
        ))
    }

    /// Disjoint union; vertices of `parts[k]` are shifted by the sizes of the
    /// earlier parts. The degree bound is the largest of the parts' bounds.
    pub fn disjoint_union(parts: &[&Graph]) -> Graph {
        let mut adjacency = Vec::new();
        let mut loops = Vec::new();
        let mut edge_labels = BTreeMap::new();
        let mut d = 0;
        for g in parts {
            let offset = adjacency.len();
            adjacency.extend(
                g.adjacency
                    .iter()
                    .map(|ns| ns.iter().map(|&w| w + offset).collect::<Vec<_>>()),
            );
            loops.extend_from_slice(&g.loops);
            for (&(u, v), l) in &g.edge_labels {
                edge_labels.insert((u + offset, v + offset), l.clone());
            }
            d = d.max(g.degree_bound);
        }
        Graph {
            adjacency,
            loops,
            degree_bound: d,
            edge_labels,
        }
    }

    /// Copy with edges removed and added. Used by rewiring, which keeps
    /// vertex indices stable.
    pub(crate) fn edited(
        &self,
        remove: &[(usize, usize)],
        add: &[(usize, usize)],
    ) -> Result<Graph> {
        let mut g = self.clone();
        for &(u, v) in remove {
            if let Ok(i) = g.adjacency[u].binary_search(&v) {
                g.adjacency[u].remove(i);
            }
            if let Ok(i) = g.adjacency[v].binary_search(&u) {
                g.adjacency[v].remove(i);
            }
            g.edge_labels.remove(&(u.min(v), u.max(v)));
        }
        for &(u, v) in add {
            if u == v {
                return Err(Error::LoopNotAllowed(u));
            }
            match g.adjacency[u].binary_search(&v) {
                Ok(_) => return Err(Error::DuplicateEdge(u.min(v), u.max(v))),
                Err(i) => g.adjacency[u].insert(i, v),
            }
            let i = g.adjacency[v].binary_search(&u).unwrap_err();
            g.adjacency[v].insert(i, u);
        }
        for &(u, v) in add {
            for w in [u, v] {
                if g.degree(w) > g.degree_bound {
                    return Err(Error::DegreeExceeded {
                        vertex: w,
                        bound: g.degree_bound,
                    });
                }
            }
        }
        Ok(g)
    }

    /// Copy with every edge and loop at the given vertices removed.
    pub(crate) fn isolate(&self, vertices: &VertexSet) -> Graph {
        let mut g = self.clone();
        let mask = vertices.mask(self.n());
        for v in vertices.iter() {
            g.adjacency[v].clear();
            g.loops[v] = false;
        }
        for list in &mut g.adjacency {
            list.retain(|&w| !mask[w]);
        }
        g.edge_labels.retain(|(u, v), _| !mask[*u] && !mask[*v]);
        g
    }
}

/// Indexed sequence of graphs sharing one degree bound, with per-index labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSpace {
    graphs: Vec<Graph>,
    labels: Vec<String>,
    degree_bound: usize,
}

impl BoxSpace {
    /// Every member must satisfy the shared degree bound `d`.
    pub fn new(graphs: Vec<Graph>, labels: Vec<String>, d: usize) -> Result<BoxSpace> {
        if labels.len() != graphs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} graphs",
                labels.len(),
                graphs.len()
            )));
        }
        for g in &graphs {
            let max_degree = g.max_degree();
            if max_degree > d {
                return Err(Error::DegreeBoundTooSmall { bound: d, max_degree });
            }
        }
        Ok(BoxSpace {
            graphs,
            labels,
            degree_bound: d,
        })
    }

    /// Shared bound taken as the largest member bound; labels are indices.
    pub fn from_graphs(graphs: Vec<Graph>) -> BoxSpace {
        let d = graphs.iter().map(Graph::degree_bound).max().unwrap_or(0);
        let labels = (0..graphs.len()).map(|i| i.to_string()).collect();
        BoxSpace {
            graphs,
            labels,
            degree_bound: d,
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> Option<&Graph> {
        self.graphs.get(i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.graphs.iter().map(Graph::n).collect()
    }

    /// Whether member sizes are non-decreasing. Reported, never enforced.
    pub fn is_monotone_growing(&self) -> bool {
        self.sizes().windows(2).all(|w| w[0] <= w[1])
    }
}
