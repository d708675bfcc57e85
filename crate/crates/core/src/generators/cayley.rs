//! Finite groups and their Cayley graphs.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A finite group with a canonical (sorted) enumeration of its elements.
pub trait FiniteGroup {
    type Element: Clone + Ord + std::fmt::Debug;

    fn elements(&self) -> Vec<Self::Element>;
    fn identity(&self) -> Self::Element;
    fn mul(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn inverse(&self, a: &Self::Element) -> Self::Element;
    fn contains(&self, a: &Self::Element) -> bool;
}

/// `Z/n`
#[derive(Clone, Copy, Debug)]
pub struct Cyclic(pub usize);

impl FiniteGroup for Cyclic {
    type Element = usize;

    fn elements(&self) -> Vec<usize> {
        (0..self.0).collect()
    }
    fn identity(&self) -> usize {
        0
    }
    fn mul(&self, a: &usize, b: &usize) -> usize {
        (a + b) % self.0
    }
    fn inverse(&self, a: &usize) -> usize {
        (self.0 - a) % self.0
    }
    fn contains(&self, a: &usize) -> bool {
        *a < self.0
    }
}

/// `Z/n₁ × … × Z/n_k`, elements in lexicographic order.
#[derive(Clone, Debug)]
pub struct Product(pub Vec<usize>);

impl FiniteGroup for Product {
    type Element = Vec<usize>;

    fn elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &m in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..m).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out
    }
    fn identity(&self) -> Vec<usize> {
        vec![0; self.0.len()]
    }
    fn mul(&self, a: &Vec<usize>, b: &Vec<usize>) -> Vec<usize> {
        a.iter().zip(b).zip(&self.0).map(|((x, y), m)| (x + y) % m).collect()
    }
    fn inverse(&self, a: &Vec<usize>) -> Vec<usize> {
        a.iter().zip(&self.0).map(|(x, m)| (m - x) % m).collect()
    }
    fn contains(&self, a: &Vec<usize>) -> bool {
        a.len() == self.0.len() && a.iter().zip(&self.0).all(|(x, m)| x < m)
    }
}

/// `Sym(k)` acting on `0..k`; `(σ·τ)(i) = σ(τ(i))`.
#[derive(Clone, Copy, Debug)]
pub struct Symmetric(pub usize);

impl FiniteGroup for Symmetric {
    type Element = Vec<usize>;

    fn elements(&self) -> Vec<Vec<usize>> {
        fn extend(k: usize, prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if prefix.len() == k {
                out.push(prefix.clone());
                return;
            }
            for x in 0..k {
                if !used[x] {
                    used[x] = true;
                    prefix.push(x);
                    extend(k, prefix, used, out);
                    prefix.pop();
                    used[x] = false;
                }
            }
        }
        let mut out = Vec::new();
        extend(self.0, &mut Vec::new(), &mut vec![false; self.0], &mut out);
        out
    }
    fn identity(&self) -> Vec<usize> {
        (0..self.0).collect()
    }
    fn mul(&self, a: &Vec<usize>, b: &Vec<usize>) -> Vec<usize> {
        b.iter().map(|&i| a[i]).collect()
    }
    fn inverse(&self, a: &Vec<usize>) -> Vec<usize> {
        let mut inv = vec![0; a.len()];
        for (i, &x) in a.iter().enumerate() {
            inv[x] = i;
        }
        inv
    }
    fn contains(&self, a: &Vec<usize>) -> bool {
        let mut seen = vec![false; self.0];
        a.len() == self.0 && a.iter().all(|&x| x < self.0 && !std::mem::replace(&mut seen[x], true))
    }
}

/// Transposition of `i` and `j` in `Sym(k)`.
pub fn transposition(k: usize, i: usize, j: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..k).collect();
    p.swap(i, j);
    p
}

/// `SL(2, Z/p)`; a matrix `[[a, b], [c, d]]` is stored as `[a, b, c, d]`.
#[derive(Clone, Copy, Debug)]
pub struct Sl2(pub usize);

impl Sl2 {
    /// `E12(±1)` and `E21(±1)`.
    pub fn elementary_generators(&self) -> Vec<[usize; 4]> {
        let m = self.0 - 1;
        vec![[1, 1, 0, 1], [1, m, 0, 1], [1, 0, 1, 1], [1, 0, m, 1]]
    }
}

impl FiniteGroup for Sl2 {
    type Element = [usize; 4];

    fn elements(&self) -> Vec<[usize; 4]> {
        let p = self.0;
        let mut out = Vec::new();
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        if (a * d + p * p - (b * c) % p) % p == 1 % p {
                            out.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        out
    }
    fn identity(&self) -> [usize; 4] {
        [1, 0, 0, 1]
    }
    fn mul(&self, x: &[usize; 4], y: &[usize; 4]) -> [usize; 4] {
        let p = self.0;
        [
            (x[0] * y[0] + x[1] * y[2]) % p,
            (x[0] * y[1] + x[1] * y[3]) % p,
            (x[2] * y[0] + x[3] * y[2]) % p,
            (x[2] * y[1] + x[3] * y[3]) % p,
        ]
    }
    fn inverse(&self, x: &[usize; 4]) -> [usize; 4] {
        let p = self.0;
        [x[3], (p - x[1]) % p, (p - x[2]) % p, x[0]]
    }
    fn contains(&self, x: &[usize; 4]) -> bool {
        let p = self.0;
        x.iter().all(|&v| v < p) && (x[0] * x[3] + p * p - (x[1] * x[2]) % p) % p == 1 % p
    }
}

/// Cayley graph with `x ~ s·x` for `s` in `gens`; vertices follow the
/// group's enumeration and the degree bound is the number of distinct
/// generators.
pub fn cayley_graph<G: FiniteGroup>(group: &G, gens: &[G::Element]) -> Result<Graph> {
    let set: BTreeSet<G::Element> = gens.iter().cloned().collect();
    for s in &set {
        if !group.contains(s) {
            return Err(Error::InvalidArgument(format!("{s:?} is not a group element")));
        }
        if *s == group.identity() {
            return Err(Error::IdentityGenerator);
        }
        if !set.contains(&group.inverse(s)) {
            return Err(Error::NotSymmetric);
        }
    }
    let elements = group.elements();
    let index: BTreeMap<&G::Element, usize> = elements.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut edges = BTreeSet::new();
    for (i, x) in elements.iter().enumerate() {
        for s in &set {
            let j = index[&group.mul(s, x)];
            edges.insert((i.min(j), i.max(j)));
        }
    }
    Graph::new(elements.len(), &edges.into_iter().collect::<Vec<_>>(), set.len())
}
