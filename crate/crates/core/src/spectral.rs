//! Laplacian and Markov operators and their low spectra.

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{dense_symmetric_eigen, lanczos_smallest, LanczosOptions};
use crate::error::{Error, Result};
use crate::graph::{BoxSpace, Graph, VertexSet};
use crate::scalar::{distance, Real};

/// Above this dimension `spectrum` switches to the iterative solver.
pub const DENSE_LIMIT: usize = 512;

/// Sparse symmetric matrix stored as a diagonal plus off-diagonal rows.
///
/// Operators built from graphs may carry a kernel hint: a partition of the
/// vertices whose class indicators span the kernel. The iterative solver
/// deflates it exactly instead of resolving zero eigenvalues numerically.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricOperator<T> {
    diag: Vec<T>,
    rows: Vec<Vec<(usize, T)>>,
    kernel_hint: Option<Vec<VertexSet>>,
}

impl<T: Real> SymmetricOperator<T> {
    /// Builds an operator from `(row, col, value)` triplets. Off-diagonal
    /// entries must appear in both orientations with identical values;
    /// repeated positions are summed.
    pub fn from_entries(n: usize, entries: &[(usize, usize, T)]) -> Result<Self> {
        let mut diag = vec![T::zero(); n];
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for &(i, j, v) in entries {
            for x in [i, j] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if i == j {
                diag[i] += v;
            } else {
                rows[i].push((j, v));
            }
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, T)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some((k, w)) if *k == j => *w += v,
                    _ => merged.push((j, v)),
                }
            }
            *row = merged;
        }
        let op = SymmetricOperator {
            diag,
            rows,
            kernel_hint: None,
        };
        if !op.is_symmetric() {
            return Err(Error::InvalidArgument("entries are not symmetric".into()));
        }
        Ok(op)
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricOperator {
            diag: vec![T::zero(); n],
            rows: vec![Vec::new(); n],
            kernel_hint: None,
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    /// Stored off-diagonal entries of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn kernel_hint(&self) -> Option<&[VertexSet]> {
        self.kernel_hint.as_deref()
    }

    pub fn with_kernel_hint(mut self, classes: Vec<VertexSet>) -> Self {
        self.kernel_hint = Some(classes);
        self
    }

    /// All stored entries as `(row, col, value)`, diagonal included.
    pub fn entries(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            out.push((i, i, self.diag[i]));
            out.extend(self.rows[i].iter().map(|&(j, v)| (i, j, v)));
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n()).all(|i| {
            self.rows[i].iter().all(|&(j, v)| {
                self.rows[j]
                    .binary_search_by_key(&i, |&(k, _)| k)
                    .map(|p| self.rows[j][p].1 == v)
                    .unwrap_or(false)
            })
        })
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n());
        (0..self.n())
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                for &(j, v) in &self.rows[i] {
                    acc += v * x[j];
                }
                acc
            })
            .collect()
    }

    /// `⟨A x, x⟩`
    pub fn quadratic_form(&self, x: &[T]) -> T {
        self.apply(x).iter().zip(x).map(|(&a, &b)| a * b).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.n();
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            m[i * n + i] = self.diag[i];
            for &(j, v) in &self.rows[i] {
                m[i * n + j] = v;
            }
        }
        m
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> T {
        (0..self.n())
            .map(|i| {
                self.diag[i].abs() + self.rows[i].iter().map(|&(_, v)| v.abs()).sum::<T>()
            })
            .fold(T::zero(), T::max)
    }
}

/// Combinatorial Laplacian: degree on the diagonal (loops excluded), −1 per
/// edge.
pub fn laplacian<T: Real>(g: &Graph) -> SymmetricOperator<T> {
    let weighted: Vec<(usize, usize, T)> = g.edges().map(|(u, v)| (u, v, T::one())).collect();
    weighted_laplacian(g.n(), &weighted)
}

/// Laplacian with edge weights. The kernel hint is the component partition
/// of the positively weighted edges.
pub fn weighted_laplacian<T: Real>(n: usize, edges: &[(usize, usize, T)]) -> SymmetricOperator<T> {
    let mut diag = vec![T::zero(); n];
    let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut support = Vec::new();
    for &(u, v, w) in edges {
        if w == T::zero() {
            continue;
        }
        diag[u] += w;
        diag[v] += w;
        rows[u].push((v, -w));
        rows[v].push((u, -w));
        support.push((u, v));
    }
    for row in &mut rows {
        row.sort_by_key(|&(j, _)| j);
    }
    let classes = Graph::with_loops(n, &support, &[], usize::MAX)
        .map(|g| g.connected_components())
        .unwrap_or_else(|_| (0..n).map(VertexSet::singleton).collect());
    SymmetricOperator {
        diag,
        rows,
        kernel_hint: Some(classes),
    }
}

/// Markov operator `I − Δ/(2d)`.
pub fn markov<T: Real>(g: &Graph, d: usize) -> Result<SymmetricOperator<T>> {
    let max_degree = g.max_degree();
    if d == 0 || max_degree > d {
        return Err(Error::DegreeBoundTooSmall { bound: d, max_degree });
    }
    let lap = laplacian::<T>(g);
    let s = T::one() / T::from_count(2 * d);
    Ok(SymmetricOperator {
        diag: lap.diag.iter().map(|&x| T::one() - s * x).collect(),
        rows: lap
            .rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| (j, -s * v)).collect())
            .collect(),
        kernel_hint: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactDense,
    Iterative,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport<T> {
    pub eigenvalues: Vec<T>,
    pub kernel_dim: usize,
    pub gap: T,
    pub method: Method,
    pub tol: T,
    pub max_residual: T,
}

/// Eigenvalues within this distance of zero count as kernel in dense solves.
fn kernel_tol<T: Real>(op: &SymmetricOperator<T>) -> T {
    let scaled = T::lit(100.0) * T::epsilon() * op.norm_bound().max(T::one());
    scaled.max(T::lit(1e-9))
}

/// The `k` smallest eigenvalues with kernel dimension and gap above it.
pub fn spectrum<T: Real>(op: &SymmetricOperator<T>, k: usize, tol: T) -> Result<SpectrumReport<T>> {
    solve(op, k, tol, false).map(|(r, _)| r)
}

/// Like [`spectrum`], also returning unit eigenvectors for the reported
/// eigenvalues. Kernel vectors from a hint are class indicators.
pub(crate) fn solve<T: Real>(
    op: &SymmetricOperator<T>,
    k: usize,
    tol: T,
    want_vectors: bool,
) -> Result<(SpectrumReport<T>, Vec<Vec<T>>)> {
    let n = op.n();
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds dimension {n}")));
    }
    if n == 0 {
        return Ok((
            SpectrumReport {
                eigenvalues: Vec::new(),
                kernel_dim: 0,
                gap: T::zero(),
                method: Method::ExactDense,
                tol,
                max_residual: T::zero(),
            },
            Vec::new(),
        ));
    }
    let ktol = kernel_tol(op);
    if n <= DENSE_LIMIT {
        let e = dense_symmetric_eigen(n, &op.to_dense())?;
        let kernel_dim = e.values.iter().filter(|v| v.abs() <= ktol).count();
        let gap = e
            .values
            .iter()
            .copied()
            .find(|&v| v > ktol)
            .unwrap_or(T::zero());
        let max_residual = e
            .values
            .iter()
            .zip(&e.vectors)
            .take(k)
            .map(|(&l, v)| residual(op, l, v))
            .fold(T::zero(), T::max);
        let vectors = if want_vectors {
            e.vectors.into_iter().take(k).collect()
        } else {
            Vec::new()
        };
        return Ok((
            SpectrumReport {
                eigenvalues: e.values.into_iter().take(k).collect(),
                kernel_dim,
                gap,
                method: Method::ExactDense,
                tol,
                max_residual,
            },
            vectors,
        ));
    }

    let upper = op.norm_bound().max(T::one()) * T::lit(1.01);
    let opts = LanczosOptions::new(tol);
    let apply = |x: &[T]| op.apply(x);
    match op.kernel_hint() {
        Some(classes) => {
            let basis: Vec<Vec<T>> = classes
                .iter()
                .map(|c| {
                    let w = T::one() / T::from_count(c.len()).sqrt();
                    let mut v = vec![T::zero(); n];
                    for x in c.iter() {
                        v[x] = w;
                    }
                    v
                })
                .collect();
            let kernel_dim = basis.len();
            let want = k.saturating_sub(kernel_dim).max(1).min(n - kernel_dim);
            let res = if want == 0 {
                None
            } else {
                Some(lanczos_smallest(n, apply, upper, want, &basis, &opts)?)
            };
            let (mut values, mut vectors, max_residual) = match res {
                Some(r) => (r.eigen.values, r.eigen.vectors, r.max_residual),
                None => (Vec::new(), Vec::new(), T::zero()),
            };
            let gap = values.first().copied().unwrap_or(T::zero());
            let mut eigenvalues = vec![T::zero(); kernel_dim];
            eigenvalues.append(&mut values);
            eigenvalues.truncate(k);
            let mut all_vectors = basis;
            all_vectors.append(&mut vectors);
            all_vectors.truncate(if want_vectors { k } else { 0 });
            Ok((
                SpectrumReport {
                    eigenvalues,
                    kernel_dim,
                    gap,
                    method: Method::Iterative,
                    tol,
                    max_residual,
                },
                all_vectors,
            ))
        }
        None => {
            // Without a hint, widen the window until an eigenvalue clears the
            // kernel threshold or the whole spectrum is resolved.
            let mut want = k.max(1);
            loop {
                let r = lanczos_smallest(n, apply, upper, want, &[], &opts)?;
                let kernel_dim = r.eigen.values.iter().filter(|v| v.abs() <= ktol).count();
                let gap = r.eigen.values.iter().copied().find(|&v| v > ktol);
                if gap.is_some() || want >= n {
                    let mut vectors = r.eigen.vectors;
                    vectors.truncate(if want_vectors { k } else { 0 });
                    return Ok((
                        SpectrumReport {
                            eigenvalues: r.eigen.values.into_iter().take(k).collect(),
                            kernel_dim,
                            gap: gap.unwrap_or(T::zero()),
                            method: Method::Iterative,
                            tol,
                            max_residual: r.max_residual,
                        },
                        vectors,
                    ));
                }
                want = (want * 2).min(n);
            }
        }
    }
}

fn residual<T: Real>(op: &SymmetricOperator<T>, lambda: T, v: &[T]) -> T {
    let av = op.apply(v);
    let lv: Vec<T> = v.iter().map(|&x| lambda * x).collect();
    distance(&av, &lv)
}

/// Smallest Laplacian eigenvalue above the kernel (0 for edgeless graphs).
pub fn laplacian_gap<T: Real>(g: &Graph, tol: T) -> Result<T> {
    Ok(spectrum(&laplacian::<T>(g), g.n().min(1), tol)?.gap)
}

/// Second-smallest Laplacian eigenvalue; 0 when the graph is disconnected
/// and by convention when `n < 2`.
pub fn algebraic_connectivity<T: Real>(g: &Graph, tol: T) -> Result<T> {
    if g.n() < 2 || !g.is_connected() {
        return Ok(T::zero());
    }
    laplacian_gap(g, tol)
}

/// Fiedler vector of a connected graph with at least two vertices.
pub fn fiedler_vector<T: Real>(g: &Graph, tol: T) -> Result<(T, Vec<T>)> {
    if g.n() < 2 || !g.is_connected() {
        return Err(Error::InvalidArgument(
            "Fiedler vector needs a connected graph on at least two vertices".into(),
        ));
    }
    let (report, mut vectors) = solve(&laplacian::<T>(g), 2, tol, true)?;
    Ok((report.eigenvalues[1], vectors.swap_remove(1)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpanderCheck<T> {
    pub passes: Vec<bool>,
    pub gaps: Vec<T>,
    pub min_gap: T,
}

/// Per-graph test `gap(Δ) ≥ c`, computed in parallel.
pub fn expander_check<T: Real>(x: &BoxSpace, c: T, tol: T) -> Result<ExpanderCheck<T>> {
    if c <= T::zero() {
        return Err(Error::InvalidArgument("threshold c must be positive".into()));
    }
    let gaps = x
        .graphs()
        .par_iter()
        .map(|g| laplacian_gap(g, tol))
        .collect::<Result<Vec<T>>>()?;
    let min_gap = gaps.iter().copied().fold(T::infinity(), T::min);
    Ok(ExpanderCheck {
        passes: gaps.iter().map(|&g| g >= c).collect(),
        min_gap: if gaps.is_empty() { T::zero() } else { min_gap },
        gaps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionCheck<T> {
    /// `‖M^{k+1} f − M^k f‖`
    pub lhs: Vec<T>,
    /// `(1 − c_M)^k ‖M f − f‖`
    pub rhs: Vec<T>,
    pub holds: Vec<bool>,
}

impl<T> ContractionCheck<T> {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

/// Checks `‖M^{k+1}f − M^k f‖ ≤ (1−c_M)^k ‖Mf − f‖ + tol` for `k = 0..=k_max`,
/// with `M` built from the graph's degree bound.
pub fn markov_contraction_check<T: Real>(
    g: &Graph,
    f: &[T],
    k_max: usize,
    c_m: T,
    tol: T,
) -> Result<ContractionCheck<T>> {
    check_len(g, f)?;
    let m = markov::<T>(g, g.degree_bound())?;
    let mut cur = f.to_vec();
    let mut next = m.apply(&cur);
    let base = distance(&next, &cur);
    let rate = T::one() - c_m;
    let mut out = ContractionCheck {
        lhs: Vec::with_capacity(k_max + 1),
        rhs: Vec::with_capacity(k_max + 1),
        holds: Vec::with_capacity(k_max + 1),
    };
    let mut factor = T::one();
    for _ in 0..=k_max {
        let lhs = distance(&next, &cur);
        let rhs = factor * base;
        out.holds.push(lhs <= rhs + tol);
        out.lhs.push(lhs);
        out.rhs.push(rhs);
        factor *= rate;
        cur = next;
        next = m.apply(&cur);
    }
    Ok(out)
}

/// `M^k f` by repeated sparse application, `M` from the graph's degree bound.
pub fn power_iterate<T: Real>(g: &Graph, f: &[T], k: usize) -> Result<Vec<T>> {
    check_len(g, f)?;
    let m = markov::<T>(g, g.degree_bound())?;
    let mut cur = f.to_vec();
    for _ in 0..k {
        cur = m.apply(&cur);
    }
    Ok(cur)
}

fn check_len<T>(g: &Graph, f: &[T]) -> Result<()> {
    if f.len() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "function has {} entries, graph has {} vertices",
            f.len(),
            g.n()
        )));
    }
    Ok(())
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

    fn values(g: &Graph) -> Vec<f64> {
        spectrum(&laplacian::<f64>(g), g.n(), 1e-10).unwrap().eigenvalues
    }

    fn assert_close(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn laplacian_examples() {
        assert_close(&values(&complete(3)), &[0.0, 3.0, 3.0]);
        assert_close(&values(&cycle(4)), &[0.0, 2.0, 2.0, 4.0]);
        assert_close(&values(&build_graph(2, &[(0, 1)], 1).unwrap()), &[0.0, 2.0]);
    }

    #[test]
    fn laplacian_ignores_loops() {
        let g = Graph::with_loops(2, &[(0, 1)], &[0, 1], 2).unwrap();
        assert_eq!(laplacian::<f64>(&g).diagonal(), &[1.0, 1.0]);
    }

    #[test]
    fn markov_examples() {
        let m = markov::<f64>(&complete(3), 2).unwrap();
        let s = spectrum(&m, 3, 1e-10).unwrap();
        assert_close(&s.eigenvalues, &[0.25, 0.25, 1.0]);
        assert_eq!(m.apply(&[1.0; 3]), vec![1.0; 3]);
        let id = markov::<f64>(&Graph::empty(3, 2), 2).unwrap();
        assert_eq!(id.to_dense(), vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            markov::<f64>(&complete(4), 2),
            Err(Error::DegreeBoundTooSmall { bound: 2, max_degree: 3 })
        ));
    }

    #[test]
    fn spectrum_examples() {
        let two = build_graph(4, &[(0, 1), (2, 3)], 1).unwrap();
        let s = spectrum(&laplacian::<f64>(&two), 3, 1e-10).unwrap();
        assert_close(&s.eigenvalues, &[0.0, 0.0, 2.0]);
        assert_eq!(s.kernel_dim, 2);
        assert!((s.gap - 2.0).abs() < 1e-12);

        let s = spectrum(&laplacian::<f64>(&cycle(8)), 2, 1e-10).unwrap();
        assert!((s.gap - (2.0 - 2f64.sqrt())).abs() < 1e-12);

        let z = SymmetricOperator::<f64>::zeros(5);
        let s = spectrum(&z, 5, 1e-10).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0; 5]);
        assert_eq!((s.kernel_dim, s.gap), (5, 0.0));
    }

    #[test]
    fn spectrum_rejects_large_k() {
        assert!(spectrum(&laplacian::<f64>(&cycle(4)), 5, 1e-9).is_err());
    }

    #[test]
    fn iterative_matches_closed_form_above_crossover() {
        let n = 600;
        let g = Graph::disjoint_union(&[&cycle(n), &cycle(n / 2)]);
        let s = spectrum(&laplacian::<f64>(&g), 4, 1e-9).unwrap();
        assert_eq!(s.method, Method::Iterative);
        assert_eq!(s.kernel_dim, 2);
        let mut expect: Vec<f64> = (1..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .chain(
                (1..n / 2).map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / (n / 2) as f64).cos()),
            )
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((s.gap - expect[0]).abs() < 1e-8);
        assert!((s.eigenvalues[2] - expect[0]).abs() < 1e-8);
        assert!((s.eigenvalues[3] - expect[1]).abs() < 1e-8);
    }

    #[test]
    fn f32_spectrum() {
        let s = spectrum(&laplacian::<f32>(&complete(4)), 4, 1e-4).unwrap();
        assert_eq!(s.kernel_dim, 1);
        assert!((s.gap - 4.0).abs() < 1e-4);
    }

    #[test]
    fn expander_check_examples() {
        let space = BoxSpace::from_graphs(vec![complete(4), complete(5), complete(6)]);
        let r = expander_check(&space, 3.0f64, 1e-10).unwrap();
        assert_eq!(r.passes, vec![true; 3]);
        assert!((r.min_gap - 4.0).abs() < 1e-10);

        let mut e: Vec<(usize, usize)> = Vec::new();
        for off in [0, 4] {
            for u in 0..4 {
                for v in u + 1..4 {
                    e.push((u + off, v + off));
                }
            }
        }
        e.push((0, 4));
        let bridged = build_graph(8, &e, 4).unwrap();
        let r = expander_check(&BoxSpace::from_graphs(vec![bridged]), 1.0, 1e-10).unwrap();
        assert_eq!(r.passes, vec![false]);

        let r = expander_check(&BoxSpace::from_graphs(vec![Graph::empty(3, 1)]), 0.1, 1e-10).unwrap();
        assert_eq!(r.passes, vec![false]);
        assert!(expander_check(&BoxSpace::from_graphs(vec![]), 0.0f64, 1e-10).is_err());
    }

    #[test]
    fn contraction_examples() {
        let k3 = complete(3);
        let r = markov_contraction_check(&k3, &[1.0; 3], 10, 0.5, 1e-12).unwrap();
        assert!(r.all_hold());
        assert!(r.lhs.iter().all(|&x| x == 0.0));

        let r = markov_contraction_check(&k3, &[0.3, -1.2, 0.7], 50, 0.75, 1e-9).unwrap();
        assert!(r.all_hold());

        // c_M above gap/(2d) must break the inequality somewhere
        let c8 = cycle(8);
        let f: Vec<f64> = (0..8).map(|i| (i as f64 * 0.9).sin()).collect();
        let c_m = 3.0 * (2.0 - 2f64.sqrt()) / 4.0;
        let r = markov_contraction_check(&c8, &f, 20, c_m, 1e-9).unwrap();
        assert!(!r.all_hold());
    }

    #[test]
    fn power_iterate_examples() {
        let e = build_graph(2, &[(0, 1)], 1).unwrap();
        assert_eq!(power_iterate(&e, &[1.0, 0.0], 0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(power_iterate(&e, &[1.0, 0.0], 1).unwrap(), vec![0.5, 0.5]);
        let e2 = e.clone().with_degree_bound(2).unwrap();
        assert_eq!(power_iterate(&e2, &[1.0, 0.0], 1).unwrap(), vec![0.75, 0.25]);
        let c = cycle(6);
        assert_eq!(power_iterate(&c, &[1.0; 6], 7).unwrap(), vec![1.0; 6]);
    }
}
