//! Permutation actions and the sofic good-set verifier.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::VertexSet;
use crate::Ratio;

/// Generators acting by permutations of `0..m`, each paired with its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermAction {
    m: usize,
    labels: Vec<String>,
    perms: Vec<Vec<usize>>,
    /// `inverse[i]` is the index of the label inverse to label `i`.
    inverse: Vec<usize>,
}

impl PermAction {
    /// `inverse_labels[i]` names the inverse of `labels[i]`; an involution
    /// names itself.
    pub fn new(m: usize, labels: Vec<String>, perms: Vec<Vec<usize>>, inverse_labels: Vec<String>) -> Result<PermAction> {
        if labels.len() != perms.len() || labels.len() != inverse_labels.len() {
            return Err(Error::InvalidArgument("labels, permutations and inverses differ in length".into()));
        }
        for (l, p) in labels.iter().zip(&perms) {
            let mut seen = vec![false; m];
            if p.len() != m || !p.iter().all(|&x| x < m && !std::mem::replace(&mut seen[x], true)) {
                return Err(Error::NotAPermutation(l.clone()));
            }
        }
        let index = |s: &String| {
            labels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| Error::UnknownLabel(s.clone()))
        };
        let inverse = inverse_labels.iter().map(index).collect::<Result<Vec<_>>>()?;
        for (i, &j) in inverse.iter().enumerate() {
            if inverse[j] != i || (0..m).any(|x| perms[j][perms[i][x]] != x) {
                return Err(Error::InverseMismatch(labels[i].clone(), labels[j].clone()));
            }
        }
        Ok(PermAction {
            m,
            labels,
            perms,
            inverse,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn perm(&self, label: &str) -> Result<&[usize]> {
        let i = self.label_index(label)?;
        Ok(&self.perms[i])
    }

    fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Permutation of a word: whitespace-separated labels applied right to
    /// left, so `"a b"` is `σ(a)∘σ(b)`. The empty word is the identity.
    pub fn word_perm(&self, word: &str) -> Result<Vec<usize>> {
        let mut p: Vec<usize> = (0..self.m).collect();
        for label in word.split_whitespace().rev() {
            let s = &self.perms[self.label_index(label)?];
            for x in p.iter_mut() {
                *x = s[*x];
            }
        }
        Ok(p)
    }

    /// Copy with `σ(label)` replaced by `σ(label)∘(p−1 p)` and its inverse
    /// adjusted; `p` is drawn from `1..m`. Returns the new action and `p`.
    pub fn inject_defect(&self, label: &str, seed: u64) -> Result<(PermAction, usize)> {
        if self.m < 2 {
            return Err(Error::InvalidArgument("defect needs at least two points".into()));
        }
        let i = self.label_index(label)?;
        let p = ChaCha8Rng::seed_from_u64(seed).gen_range(1..self.m);
        let mut out = self.clone();
        out.perms[i].swap(p - 1, p);
        let j = self.inverse[i];
        if j != i {
            let fwd = out.perms[i].clone();
            for (x, &y) in fwd.iter().enumerate() {
                out.perms[j][y] = x;
            }
        } else {
            // an involution stays one only if the defect commutes; re-pair it
            // with a fresh inverse label instead of breaking the invariant
            let fwd = out.perms[i].clone();
            let mut inv = vec![0; self.m];
            for (x, &y) in fwd.iter().enumerate() {
                inv[y] = x;
            }
            if inv != fwd {
                out.labels.push(format!("{label}^-1"));
                out.perms.push(inv);
                let k = out.labels.len() - 1;
                out.inverse[i] = k;
                out.inverse.push(i);
            }
        }
        Ok((out, p))
    }
}

/// `left · right = product` as words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub left: String,
    pub right: String,
    pub product: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoficReport {
    pub good: VertexSet,
    pub epsilon: f64,
    #[serde(serialize_with = "ratio_string")]
    pub epsilon_exact: Ratio,
    pub bad: usize,
    /// Points violating at least one multiplicativity relation.
    pub multiplicativity_failures: usize,
    /// Points fixed by at least one listed word.
    pub fixed_point_failures: usize,
    pub relations_checked: usize,
    pub words_checked: usize,
}

fn ratio_string<S: serde::Serializer>(r: &Ratio, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Points `y` with `σ(g)σ(h)y = σ(gh)y` for every relation and `σ(w)y ≠ y`
/// for every listed word.
pub fn sofic_verify(a: &PermAction, relations: &[Relation], check_fixed: &[String]) -> Result<SoficReport> {
    let mut cache: HashMap<&str, Vec<usize>> = HashMap::new();
    let m = a.m();
    let mut mult_bad = vec![false; m];
    for r in relations {
        for w in [&r.left, &r.right, &r.product] {
            if !cache.contains_key(w.as_str()) {
                cache.insert(w, a.word_perm(w)?);
            }
        }
        let (left, right, product) = (&cache[r.left.as_str()], &cache[r.right.as_str()], &cache[r.product.as_str()]);
        for y in 0..m {
            if left[right[y]] != product[y] {
                mult_bad[y] = true;
            }
        }
    }
    let mut fixed_bad = vec![false; m];
    for w in check_fixed {
        let p = a.word_perm(w)?;
        for y in 0..m {
            if p[y] == y {
                fixed_bad[y] = true;
            }
        }
    }
    let good = VertexSet::from_mask(&(0..m).map(|y| !mult_bad[y] && !fixed_bad[y]).collect::<Vec<_>>());
    let bad = m - good.len();
    let epsilon_exact = if m == 0 { Ratio::from_integer(0) } else { Ratio::new(bad as u64, m as u64) };
    Ok(SoficReport {
        good,
        epsilon: if m == 0 { 0.0 } else { bad as f64 / m as f64 },
        epsilon_exact,
        bad,
        multiplicativity_failures: mult_bad.iter().filter(|&&b| b).count(),
        fixed_point_failures: fixed_bad.iter().filter(|&&b| b).count(),
        relations_checked: relations.len(),
        words_checked: check_fixed.len(),
    })
}

/// Regular action of `Z/n` with `"a"` = +1 and `"A"` = −1.
pub fn cyclic_action(n: usize) -> PermAction {
    let plus = (0..n).map(|x| (x + 1) % n).collect();
    let minus = (0..n).map(|x| (x + n - 1) % n).collect();
    PermAction::new(
        n,
        vec!["a".into(), "A".into()],
        vec![plus, minus],
        vec!["A".into(), "a".into()],
    )
    .expect("cyclic action is valid")
}

/// The word for `a^k`.
pub fn cyclic_word(k: i64) -> String {
    let l = if k >= 0 { "a" } else { "A" };
    vec![l; k.unsigned_abs() as usize].join(" ")
}

/// Canonical exponent of `k` in `Z/n`, in `(−n/2, n/2]`.
fn reduce(k: i64, n: i64) -> i64 {
    let r = k.rem_euclid(n);
    if 2 * r > n {
        r - n
    } else {
        r
    }
}

/// Relations `a^i · a^j = a^{i+j}` for nonzero `i, j` with `|i|, |j|,
/// |i+j| ≤ radius`; the product is written in canonical form mod `n`.
pub fn cyclic_relations(n: usize, radius: usize) -> Vec<Relation> {
    let r = radius as i64;
    let mut out = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            if i == 0 || j == 0 || (i + j).abs() > r {
                continue;
            }
            out.push(Relation {
                left: cyclic_word(i),
                right: cyclic_word(j),
                product: cyclic_word(reduce(i + j, n as i64)),
            });
        }
    }
    out
}

/// Words `a^k` for `1 ≤ |k| ≤ radius`, skipping multiples of `n`.
pub fn cyclic_fixed_words(n: usize, radius: usize) -> Vec<String> {
    let r = radius as i64;
    (-r..=r)
        .filter(|&k| k != 0 && k.rem_euclid(n as i64) != 0)
        .map(cyclic_word)
        .collect()
}
