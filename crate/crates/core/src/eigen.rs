//! Symmetric eigensolvers.
//!
//! The dense path is Householder tridiagonalisation followed by the implicit
//! QL iteration (the classical `tred2`/`tql2` pair). The iterative path is a
//! Lanczos process with full reorthogonalisation, explicit restarts and
//! locking of converged Ritz pairs, run on a spectrally flipped operator so
//! that the smallest eigenvalues become the dominant ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{axpy_neg, dot, norm, scale, Real};

/// Eigen-decomposition with eigenvalues ascending and eigenvectors stored
/// column-wise (`vectors[j]` belongs to `values[j]`).
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

const QL_MAX_SWEEPS: usize = 60;

/// Full eigen-decomposition of a dense symmetric matrix given row-major.
pub fn dense_symmetric_eigen<T: Real>(n: usize, matrix: &[T]) -> Result<Eigen<T>> {
    assert_eq!(matrix.len(), n * n);
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let mut v: Vec<Vec<T>> = (0..n).map(|i| matrix[i * n..(i + 1) * n].to_vec()).collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    Ok(sorted(d, v))
}

/// Eigen-decomposition of the tridiagonal matrix with the given diagonal and
/// sub-diagonal (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> Result<Eigen<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let mut v = vec![vec![T::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let mut d = diag.to_vec();
    // tql2 expects the sub-diagonal in e[1..n].
    let mut e = vec![T::zero(); n];
    e[1..n].copy_from_slice(&off[..n - 1]);
    tql2(&mut v, &mut d, &mut e)?;
    Ok(sorted(d, v))
}

fn sorted<T: Real>(d: Vec<T>, v: Vec<Vec<T>>) -> Eigen<T> {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    Eigen {
        values: order.iter().map(|&j| d[j]).collect(),
        vectors: order
            .iter()
            .map(|&j| (0..n).map(|k| v[k][j]).collect())
            .collect(),
    }
}

fn tred2<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let zero = T::zero();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = zero;
                v[j][i] = zero;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[k][j] -= upd;
                }
                d[j] = v[i - 1][j];
                v[i][j] = zero;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[k][j] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = zero;
    }
    v[n - 1][n - 1] = T::one();
    e[0] = zero;
}

fn tql2<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    let zero = T::zero();
    let two = T::lit(2.0);
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;
    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::NoConvergence(sweeps));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        let hk = row[i + 1];
                        row[i + 1] = s * row[i] + c * hk;
                        row[i] = c * row[i] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }
    Ok(())
}

/// Settings for the restarted Lanczos solver.
#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions<T> {
    /// Residual bound `‖A y − λ y‖ ≤ tol` for a Ritz pair to be accepted.
    pub tol: T,
    pub max_restarts: usize,
    /// Initial Krylov basis size per cycle. It doubles after every cycle
    /// that locks nothing, up to a memory cap of about 2^24 scalars.
    pub basis: usize,
    pub seed: u64,
}

impl<T: Real> LanczosOptions<T> {
    pub fn new(tol: T) -> Self {
        LanczosOptions {
            tol,
            max_restarts: 300,
            basis: 80,
            seed: 0x5eed,
        }
    }
}

/// Result of the iterative solver: eigenpairs ascending plus the worst
/// residual among them.
#[derive(Clone, Debug)]
pub struct LanczosResult<T> {
    pub eigen: Eigen<T>,
    pub max_residual: T,
    pub restarts: usize,
}

/// Smallest `want` eigenpairs of the symmetric operator `apply`, restricted
/// to the orthogonal complement of `deflate` (orthonormal vectors).
///
/// `upper` must bound the spectrum from above.
pub fn lanczos_smallest<T, F>(
    n: usize,
    apply: F,
    upper: T,
    want: usize,
    deflate: &[Vec<T>],
    opts: &LanczosOptions<T>,
) -> Result<LanczosResult<T>>
where
    T: Real,
    F: Fn(&[T]) -> Vec<T>,
{
    let available = n.saturating_sub(deflate.len());
    let want = want.min(available);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let max_basis = available.min(opts.basis.max((1usize << 24) / n.max(1)));
    let mut solver = Cycle {
        n,
        apply: &apply,
        upper,
        deflate,
        basis: opts.basis.max(2 * want + 10),
    };

    let mut locked: Vec<RitzPair<T>> = Vec::new();
    let mut restarts = 0;
    let mut start = random_vec(n, &mut rng);

    loop {
        if locked.len() >= want {
            // Verification pass: a fresh random start must not reveal an
            // eigenvalue below the largest locked one.
            if want == 0 || locked.len() == available {
                break;
            }
            let probe = random_vec(n, &mut rng);
            let ritz = solver.run(probe, &locked, 1)?;
            let top = &ritz[0];
            let worst = locked
                .iter()
                .map(|p| p.value)
                .fold(T::neg_infinity(), T::max);
            if top.value >= worst - opts.tol.sqrt() {
                break;
            }
            restarts += 1;
            if restarts > opts.max_restarts {
                return Err(Error::NoConvergence(restarts));
            }
            if top.residual <= opts.tol {
                let (i, _) = locked
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap())
                    .unwrap();
                locked.remove(i);
                locked.push(top.clone());
            } else {
                // unresolved smaller eigenvalue: drop the largest locked pair
                // and resume from the probe's Ritz vector
                let (i, _) = locked
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap())
                    .unwrap();
                locked.remove(i);
                start = top.vector.clone();
            }
            continue;
        }

        let need = want - locked.len();
        let ritz = solver.run(start.clone(), &locked, need)?;
        let mut newly = 0;
        let mut rest: Vec<Vec<T>> = Vec::new();
        for pair in ritz {
            if rest.is_empty() && pair.residual <= opts.tol && newly < need {
                locked.push(pair);
                newly += 1;
            } else {
                rest.push(pair.vector);
            }
        }
        if newly == 0 {
            restarts += 1;
            if restarts > opts.max_restarts {
                return Err(Error::NoConvergence(restarts));
            }
            solver.basis = (solver.basis * 2).min(max_basis.max(solver.basis));
        }
        // Restart from the sum of the unconverged Ritz vectors. A kick far
        // below the tolerance keeps every direction reachable without
        // disturbing convergence.
        let mut next = vec![T::zero(); n];
        for y in &rest {
            for (a, &b) in next.iter_mut().zip(y) {
                *a += b;
            }
        }
        let mut kick = random_vec::<T>(n, &mut rng);
        let kn = norm(&kick);
        scale(&mut kick, opts.tol * T::lit(1e-2) / kn);
        for (a, b) in next.iter_mut().zip(kick) {
            *a += b;
        }
        start = if rest.is_empty() { random_vec(n, &mut rng) } else { next };
    }

    locked.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal));
    let max_residual = locked.iter().map(|p| p.residual).fold(T::zero(), T::max);
    Ok(LanczosResult {
        eigen: Eigen {
            values: locked.iter().map(|p| p.value).collect(),
            vectors: locked.into_iter().map(|p| p.vector).collect(),
        },
        max_residual,
        restarts,
    })
}

fn random_vec<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..n).map(|_| T::lit(rng.gen::<f64>() - 0.5)).collect()
}

#[derive(Clone, Debug)]
struct RitzPair<T> {
    value: T,
    vector: Vec<T>,
    residual: T,
}

struct Cycle<'a, T, F> {
    n: usize,
    apply: &'a F,
    upper: T,
    deflate: &'a [Vec<T>],
    basis: usize,
}

impl<'a, T, F> Cycle<'a, T, F>
where
    T: Real,
    F: Fn(&[T]) -> Vec<T>,
{
    fn orthogonalize(&self, x: &mut [T], locked: &[RitzPair<T>], basis: &[Vec<T>]) {
        for _ in 0..2 {
            for b in self
                .deflate
                .iter()
                .chain(locked.iter().map(|p| &p.vector))
                .chain(basis)
            {
                let c = dot(x, b);
                axpy_neg(x, c, b);
            }
        }
    }

    /// One Lanczos cycle on `upper·I − A`; returns up to `count` Ritz pairs
    /// of `A`, smallest first, with true residuals.
    fn run(&self, start: Vec<T>, locked: &[RitzPair<T>], count: usize) -> Result<Vec<RitzPair<T>>> {
        let n = self.n;
        let dim = n - self.deflate.len() - locked.len();
        let m = self.basis.min(dim);
        let mut q = start;
        self.orthogonalize(&mut q, locked, &[]);
        let mut qn = norm(&q);
        if qn <= T::epsilon().sqrt() {
            // start lies in the deflated space; fall back to a fixed vector
            q = (0..n).map(|i| T::lit(((i * 7919 + 13) % 101) as f64 - 50.0)).collect();
            self.orthogonalize(&mut q, locked, &[]);
            qn = norm(&q);
        }
        scale(&mut q, T::one() / qn);

        let flipped = |x: &[T]| -> Vec<T> {
            let ax = (self.apply)(x);
            x.iter().zip(ax).map(|(&xi, axi)| self.upper * xi - axi).collect()
        };
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut alpha: Vec<T> = Vec::with_capacity(m);
        let mut beta: Vec<T> = Vec::with_capacity(m);
        basis.push(q);
        for j in 0..m {
            let mut w = flipped(&basis[j]);
            alpha.push(dot(&w, &basis[j]));
            self.orthogonalize(&mut w, locked, &basis);
            if j + 1 == m {
                break;
            }
            let b = norm(&w);
            if b <= T::epsilon() * self.upper.max(T::one()) * T::lit(64.0) {
                break;
            }
            beta.push(b);
            scale(&mut w, T::one() / b);
            basis.push(w);
        }
        let k = alpha.len();
        let tri = tridiagonal_eigen(&alpha, &beta[..k - 1])?;
        let mut out = Vec::new();
        for idx in (0..k).rev().take(count.max(1)) {
            let s = &tri.vectors[idx];
            let mut y = vec![T::zero(); n];
            for (coef, b) in s.iter().zip(&basis) {
                for (yi, &bi) in y.iter_mut().zip(b) {
                    *yi += *coef * bi;
                }
            }
            let yn = norm(&y);
            scale(&mut y, T::one() / yn);
            let value = self.upper - tri.values[idx];
            let ay = (self.apply)(&y);
            let residual = ay
                .iter()
                .zip(&y)
                .map(|(&a, &b)| (a - value * b) * (a - value * b))
                .sum::<T>()
                .sqrt();
            out.push(RitzPair {
                value,
                vector: y,
                residual,
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dense_diagonal_and_2x2() {
        let e = dense_symmetric_eigen(3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let e = dense_symmetric_eigen(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(close(e.values[0], 1.0, 1e-14) && close(e.values[1], 3.0, 1e-14));
        let v = &e.vectors[0];
        assert!(close(v[0].abs(), 0.5f64.sqrt(), 1e-12));
        assert!(close(v[0] + v[1], 0.0, 1e-12));
    }

    #[test]
    fn dense_reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 12;
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.gen::<f64>() - 0.5;
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let e = dense_symmetric_eigen(n, &a).unwrap();
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                assert!(close(av, lambda * v[i], 1e-12));
            }
            assert!(close(norm(v), 1.0, 1e-12));
        }
    }

    #[test]
    fn dense_f32() {
        let e = dense_symmetric_eigen(2, &[2.0f32, 1.0, 1.0, 2.0]).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-5);
        assert!((e.values[1] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn tridiagonal_path_laplacian() {
        // path on 5 vertices: eigenvalues 2 − 2cos(πk/5)
        let diag = [1.0, 2.0, 2.0, 2.0, 1.0];
        let off = [-1.0; 4];
        let e = tridiagonal_eigen(&diag, &off).unwrap();
        for (k, &l) in e.values.iter().enumerate() {
            let expect = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / 5.0).cos();
            assert!(close(l, expect, 1e-12), "{l} vs {expect}");
        }
    }

    #[test]
    fn lanczos_matches_closed_form_on_cycle() {
        let n = 200;
        let apply = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| 2.0 * x[i] - x[(i + 1) % n] - x[(i + n - 1) % n])
                .collect()
        };
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let res = lanczos_smallest(n, apply, 4.0, 5, &[ones], &LanczosOptions::new(1e-9)).unwrap();
        let mut expect: Vec<f64> = (1..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in res.eigen.values.iter().zip(&expect) {
            assert!(close(*got, *want, 1e-8), "{got} vs {want}");
        }
        assert!(res.max_residual <= 1e-9);
    }
}
