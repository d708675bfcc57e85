//! Expander decomposition: Markov level sets, the sparse-set replacement
//! step, and the partition into a junk part and inner-expanding pieces.

use std::cmp::Ordering;

use serde::Serialize;

use crate::cheeger::{inner_expansion_exact, ratio_value, sweep_cuts, EXACT_CAP};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::scalar::{distance, norm, Real};
use crate::spectral::{algebraic_connectivity, fiedler_vector, markov};

/// Level-set band used by the replacement step.
pub const BAND: (f64, f64) = (1.0 / 3.0, 2.0 / 3.0);

const EIGEN_TOL: f64 = 1e-10;

/// Constants of the decomposition, all derived from `(c, d, α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KunParams {
    c: f64,
    d: usize,
    alpha: f64,
    c_m: f64,
    big_c: f64,
    k: usize,
    delta: f64,
    log10_delta: f64,
    good_threshold: f64,
}

impl KunParams {
    /// `c` is the assumed Laplacian gap, `d` the degree bound, `alpha` the
    /// target boundary ratio.
    pub fn new(c: f64, d: usize, alpha: f64) -> Result<KunParams> {
        if d == 0 {
            return Err(Error::InvalidArgument("degree bound must be positive".into()));
        }
        if !(c > 0.0 && c < 2.0 * d as f64) {
            return Err(Error::InvalidArgument(format!(
                "gap c = {c} must lie in (0, 2d) = (0, {})",
                2 * d
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        let df = d as f64;
        let c_m = c / (2.0 * df);
        let big_c = c_m * c_m / 72.0;
        let target = alpha * alpha / (5184.0 * df * df);
        let mut k = ((target.ln() / (1.0 - c_m).ln()).ceil() as usize).max(1);
        while k > 1 && (1.0 - c_m).powi(k as i32 - 1) <= target {
            k -= 1;
        }
        while (1.0 - c_m).powi(k as i32) > target {
            k += 1;
        }
        let log10_delta = 4.0 * alpha.log10() - 4.0 - (3 * k + 1) as f64 * df.log10();
        Ok(KunParams {
            c,
            d,
            alpha,
            c_m,
            big_c,
            k,
            delta: 10f64.powf(log10_delta),
            log10_delta,
            good_threshold: alpha * alpha / 100.0,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// `c / (2d)`
    pub fn c_m(&self) -> f64 {
        self.c_m
    }
    /// Inner-expansion constant `c_M² / 72`.
    pub fn big_c(&self) -> f64 {
        self.big_c
    }
    /// Markov power: smallest `K ≥ 1` with `(1 − c_M)^K ≤ α² / (5184 d²)`.
    pub fn k(&self) -> usize {
        self.k
    }
    /// `α⁴ / (10⁴ d^{3K+1})`; may underflow, see [`KunParams::log10_delta`].
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn log10_delta(&self) -> f64 {
        self.log10_delta
    }
    /// `α² / 100`
    pub fn good_threshold(&self) -> f64 {
        self.good_threshold
    }
}

/// Result of thresholding a vertex function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetCut {
    pub threshold: f64,
    pub set: VertexSet,
    pub boundary: usize,
    /// No function value fell strictly inside the band.
    pub empty_band: bool,
    /// Right-hand side `4d²/(a²(b−a)²)·‖Mf−f‖·‖f‖³` of the co-area bound.
    pub coarea_bound: f64,
}

impl LevelSetCut {
    pub fn bound_holds(&self, tol: f64) -> bool {
        (self.boundary as f64).powi(2) <= self.coarea_bound + tol
    }
}

/// Chooses `U = {f > t}` for `t` in the band `(a, b)` minimising `|∂U|`.
///
/// Thresholds are the midpoints between consecutive distinct values of `f`
/// inside the band, plus the midpoints to `a` and `b`. Ties prefer a
/// nonempty `U`, then a smaller one. The Markov operator uses the graph's
/// degree bound.
pub fn level_set_cut<T: Real>(g: &Graph, f: &[T], a: f64, b: f64) -> Result<LevelSetCut> {
    if !(0.0 < a && a < b && b < 1.0) {
        return Err(Error::InvalidArgument(format!("band ({a}, {b}) must satisfy 0 < a < b < 1")));
    }
    if f.len() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "function has {} entries, graph has {} vertices",
            f.len(),
            g.n()
        )));
    }
    let vals: Vec<f64> = f.iter().map(|x| x.as_f64()).collect();
    let mut inside: Vec<f64> = vals.iter().copied().filter(|&v| a < v && v < b).collect();
    inside.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    inside.dedup();
    let empty_band = inside.is_empty();

    let mut thresholds = Vec::with_capacity(inside.len() + 1);
    let mut prev = a;
    for &v in &inside {
        thresholds.push((prev + v) / 2.0);
        prev = v;
    }
    thresholds.push((prev + b) / 2.0);

    let mut best: Option<(usize, VertexSet, f64)> = None;
    for t in thresholds {
        let set = VertexSet::new((0..g.n()).filter(|&v| vals[v] > t).collect());
        let boundary = g.boundary_size(&set)?;
        let replace = match &best {
            None => true,
            Some((bb, bs, _)) => {
                (boundary, set.is_empty(), set.len()) < (*bb, bs.is_empty(), bs.len())
            }
        };
        if replace {
            best = Some((boundary, set, t));
        }
    }
    let (boundary, set, threshold) = best.expect("at least one threshold");

    let m = markov::<T>(g, g.degree_bound().max(g.max_degree()).max(1))?;
    let mf = m.apply(f);
    let d = g.degree_bound().max(1) as f64;
    let coarea_bound = 4.0 * d * d / (a * a * (b - a) * (b - a))
        * distance(&mf, f).as_f64()
        * norm(f).as_f64().powi(3);
    Ok(LevelSetCut {
        threshold,
        set,
        boundary,
        empty_band,
        coarea_bound,
    })
}

/// Individual outcomes of the replacement `T → U`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Replacement {
    pub t_size: usize,
    pub t_boundary: usize,
    pub u: VertexSet,
    pub u_boundary: usize,
    pub threshold: f64,
    pub empty_band: bool,
    pub sym_diff: usize,
    /// `|U △ T| < |T| / 4`
    pub close: bool,
    /// `|∂U| < α|U|`
    pub sparse: bool,
    /// `U ⊆ B_K(T)`
    pub within_ball: bool,
    /// `|U △ T| < |T| / 2` and `|∂U| ≤ (α²/100)|U|`: the goodness test.
    pub good: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ReplaceOutcome {
    NotApplicable { boundary: usize, limit: f64 },
    Replaced(Replacement),
}

/// The replacement step for a sparse set `T` (`|∂T| < C|T|`).
pub fn replace_set(g: &Graph, t: &VertexSet, p: &KunParams) -> Result<ReplaceOutcome> {
    t.check_range(g.n())?;
    let boundary = g.boundary_size(t)?;
    let limit = p.big_c() * t.len() as f64;
    if t.is_empty() || boundary as f64 >= limit {
        return Ok(ReplaceOutcome::NotApplicable { boundary, limit });
    }
    level_set_replacement(g, t, p).map(ReplaceOutcome::Replaced)
}

/// The level-set construction of [`replace_set`] without the sparsity gate.
pub fn level_set_replacement(g: &Graph, t: &VertexSet, p: &KunParams) -> Result<Replacement> {
    t.check_range(g.n())?;
    if p.d() < g.max_degree() {
        return Err(Error::DegreeBoundTooSmall {
            bound: p.d(),
            max_degree: g.max_degree(),
        });
    }
    let m = markov::<f64>(g, p.d())?;
    let mut f: Vec<f64> = t.mask(g.n()).iter().map(|&x| if x { 1.0 } else { 0.0 }).collect();
    for _ in 0..p.k() {
        f = m.apply(&f);
    }
    let g_d = g.clone().with_degree_bound(p.d())?;
    let cut = level_set_cut(&g_d, &f, BAND.0, BAND.1)?;
    let u = cut.set;
    let sym_diff = u.symmetric_difference(t).len();
    let tn = t.len() as f64;
    let un = u.len() as f64;
    let ball = g.ball_of_set(t, p.k())?;
    Ok(Replacement {
        t_size: t.len(),
        t_boundary: g.boundary_size(t)?,
        u_boundary: cut.boundary,
        threshold: cut.threshold,
        empty_band: cut.empty_band,
        close: (sym_diff as f64) < tn / 4.0,
        sparse: (cut.boundary as f64) < p.alpha() * un,
        within_ball: u.is_subset(&ball),
        good: (sym_diff as f64) < tn / 2.0 && cut.boundary as f64 <= p.good_threshold() * un,
        sym_diff,
        u,
    })
}

/// Smallest proper nonempty `T` (then lexicographically first) with
/// `|∂T| < C|T|`. See [`find_sparse_cut_in`].
pub fn find_sparse_cut(g: &Graph, c: f64, exact_cap: usize) -> Result<Option<VertexSet>> {
    find_sparse_cut_in(g, &VertexSet::full(g.n()), c, exact_cap)
}

/// Sparse-set search over proper nonempty subsets of `live`, boundaries
/// counted in `g`.
///
/// Each component of the induced live graph is searched separately:
/// exhaustively when it has at most `exact_cap` vertices (capped at 24),
/// otherwise over the whole component and the prefixes of its Fiedler
/// order together with their complements. The smallest passing candidate
/// over all components wins, ties broken lexicographically.
pub fn find_sparse_cut_in(
    g: &Graph,
    live: &VertexSet,
    c: f64,
    exact_cap: usize,
) -> Result<Option<VertexSet>> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("ratio C = {c} must be positive")));
    }
    live.check_range(g.n())?;
    let cap = exact_cap.min(EXACT_CAP);
    let (sub, index) = g.induced_subgraph(live)?;
    let mut best: Option<VertexSet> = None;
    let components = sub.connected_components();
    let whole_allowed = components.len() > 1;
    for comp in components {
        let vertices: Vec<usize> = comp.iter().map(|i| index[i]).collect();
        let candidate = if vertices.len() <= cap {
            exact_sparse(g, &vertices, c, whole_allowed)
        } else {
            sweep_sparse(g, &vertices, c, whole_allowed)?
        };
        if let Some(t) = candidate {
            best = match best {
                Some(b) if (b.len(), &b) <= (t.len(), &t) => Some(b),
                _ => Some(t),
            };
        }
    }
    Ok(best)
}

fn passes(boundary: usize, size: usize, c: f64) -> bool {
    (boundary as f64) < c * size as f64
}

fn exact_sparse(g: &Graph, vertices: &[usize], c: f64, whole_allowed: bool) -> Option<VertexSet> {
    let m = vertices.len();
    let set = VertexSet::new(vertices.to_vec());
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    let nbr: Vec<u32> = vertices
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter(|&&w| local[w] != usize::MAX)
                .fold(0u32, |acc, &w| acc | 1 << local[w])
        })
        .collect();
    let out: Vec<u32> = vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (g.simple_degree(v) - nbr[i].count_ones() as usize) as u32)
        .collect();

    // With C·m ≤ 1 only boundary-free sets can pass, and a minimal one is
    // connected, so it is the whole component or nothing.
    if c * m as f64 <= 1.0 {
        let total: u32 = out.iter().sum();
        return (whole_allowed && total == 0 && passes(0, m, c)).then_some(set);
    }
    let boundary = |mask: u32| -> usize {
        (0..m)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| (out[i] + (nbr[i] & !mask).count_ones()) as usize)
            .sum()
    };
    let limit: u64 = 1u64 << m;
    for size in 1..=m {
        let mut found: Option<u32> = None;
        // Gosper's hack: all masks with `size` bits in increasing order.
        let mut mask: u64 = (1u64 << size) - 1;
        while mask < limit {
            let mk = mask as u32;
            if (whole_allowed || size < m) && passes(boundary(mk), size, c) {
                found = Some(match found {
                    Some(f) if lex_first(f, mk) => f,
                    _ => mk,
                });
            }
            let low = mask & mask.wrapping_neg();
            let ripple = mask + low;
            mask = (((ripple ^ mask) >> 2) / low) | ripple;
        }
        if let Some(mk) = found {
            return Some(VertexSet::new(
                (0..m).filter(|&i| mk >> i & 1 == 1).map(|i| vertices[i]).collect(),
            ));
        }
    }
    None
}

fn lex_first(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    diff == 0 || a & diff & diff.wrapping_neg() != 0
}

fn sweep_sparse(g: &Graph, vertices: &[usize], c: f64, whole_allowed: bool) -> Result<Option<VertexSet>> {
    let comp = VertexSet::new(vertices.to_vec());
    let mut candidates = Vec::new();
    if whole_allowed {
        candidates.push(comp.clone());
    }
    let (sub, index) = g.induced_subgraph(&comp)?;
    let (_, fiedler) = fiedler_vector::<f64>(&sub, EIGEN_TOL)?;
    for prefix in sweep_cuts(&sub, &fiedler) {
        let rest = prefix.complement(sub.n());
        for local in [prefix, rest] {
            candidates.push(local.iter().map(|i| index[i]).collect());
        }
    }
    let mut best: Option<VertexSet> = None;
    for t in candidates {
        if passes(g.boundary_size(&t)?, t.len(), c) {
            best = match best {
                Some(b) if (b.len(), &b) <= (t.len(), &t) => Some(b),
                _ => Some(t),
            };
        }
    }
    Ok(best)
}

/// How a piece entered the decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// A good sparse set `T` replaced by the level set `U`.
    LevelSet { t: VertexSet, u: VertexSet, threshold: f64 },
    /// What remained once no sparse set was left.
    Remainder,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Step {
    Good {
        t_size: usize,
        piece_size: usize,
        measure: f64,
    },
    Bad {
        t_size: usize,
        junk_added: usize,
        measure: f64,
    },
    Remainder {
        piece_size: usize,
    },
    MergedIntoJunk {
        piece_size: usize,
        boundary: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub junk: VertexSet,
    pub pieces: Vec<VertexSet>,
    pub provenance: Vec<Provenance>,
    /// One entry per loop iteration and post-pass merge. `measure` is
    /// `|T|/n`, to be compared against the reported `δ`.
    pub log: Vec<Step>,
}

impl Decomposition {
    /// Checks that junk and pieces are disjoint and cover `0..n`.
    pub fn is_partition(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for set in std::iter::once(&self.junk).chain(&self.pieces) {
            for v in set.iter() {
                if v >= n || seen[v] {
                    return false;
                }
                seen[v] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceMethod {
    /// Exhaustive minimum over `T ⊆ P`, `|T| ≤ |P|/2`, of `|∂T|/|T|`.
    Exact,
    /// `λ₂(G[P]) / 2`, a lower bound on the same quantity.
    Spectral,
    /// Single-vertex piece: no admissible `T`.
    Vacuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceStatus {
    Pass,
    /// Spectral bound positive but below the required constant.
    Inconclusive,
    Fail,
}

/// Inner-expansion evidence for one piece.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub method: EvidenceMethod,
    pub value: Option<f64>,
    pub required: f64,
    pub status: EvidenceStatus,
}

/// Inner expansion of `piece` inside `g` against the constant `required`,
/// exactly when the piece has at most `exact_cap` (≤ 24) vertices.
pub fn piece_evidence(g: &Graph, piece: &VertexSet, required: f64, exact_cap: usize) -> Result<Evidence> {
    if piece.len() <= 1 {
        return Ok(Evidence {
            method: EvidenceMethod::Vacuous,
            value: None,
            required,
            status: EvidenceStatus::Pass,
        });
    }
    if piece.len() <= exact_cap.min(EXACT_CAP) {
        let (h, _) = inner_expansion_exact(g, piece)?.expect("piece has ≥ 2 vertices");
        let value: f64 = ratio_value(h);
        return Ok(Evidence {
            method: EvidenceMethod::Exact,
            value: Some(value),
            required,
            status: if value >= required {
                EvidenceStatus::Pass
            } else {
                EvidenceStatus::Fail
            },
        });
    }
    let (sub, _) = g.induced_subgraph(piece)?;
    let lb = algebraic_connectivity::<f64>(&sub, EIGEN_TOL)? / 2.0;
    let status = if lb >= required {
        EvidenceStatus::Pass
    } else if lb > EIGEN_TOL {
        EvidenceStatus::Inconclusive
    } else {
        EvidenceStatus::Fail
    };
    Ok(Evidence {
        method: EvidenceMethod::Spectral,
        value: Some(lb),
        required,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionCertificate {
    pub junk_ratio: f64,
    pub boundary_ratios: Vec<f64>,
    pub evidence: Vec<Evidence>,
    pub alpha: f64,
    pub big_c: f64,
    pub pass: bool,
}

/// Certificate for an arbitrary partition.
pub fn certify(g: &Graph, dec: &Decomposition, p: &KunParams, exact_cap: usize) -> Result<PartitionCertificate> {
    let n = g.n();
    let junk_ratio = if n == 0 { 0.0 } else { dec.junk.len() as f64 / n as f64 };
    let mut boundary_ratios = Vec::with_capacity(dec.pieces.len());
    let mut evidence = Vec::with_capacity(dec.pieces.len());
    for piece in &dec.pieces {
        boundary_ratios.push(g.boundary_size(piece)? as f64 / piece.len() as f64);
        evidence.push(piece_evidence(g, piece, p.big_c(), exact_cap)?);
    }
    let pass = junk_ratio < p.alpha()
        && boundary_ratios.iter().all(|&r| r < p.alpha())
        && evidence.iter().all(|e| e.status != EvidenceStatus::Fail);
    Ok(PartitionCertificate {
        junk_ratio,
        boundary_ratios,
        evidence,
        alpha: p.alpha(),
        big_c: p.big_c(),
        pass,
    })
}

/// Partitions `g` into junk and pieces.
///
/// Repeatedly takes a minimal sparse set `T` of the live region. If the
/// level set `U` of `M^K χ_T` is close to `T` and has small boundary, the
/// live part of `U` becomes a piece; otherwise the live part of
/// `B_{3K}(T)` becomes junk. The live region left at the end is the last
/// piece. Pieces with `|∂P| ≥ α|P|` are then moved to the junk.
pub fn kun_partition(g: &Graph, p: &KunParams, exact_cap: usize) -> Result<(Decomposition, PartitionCertificate)> {
    let n = g.n();
    if p.d() < g.max_degree() {
        return Err(Error::DegreeBoundTooSmall {
            bound: p.d(),
            max_degree: g.max_degree(),
        });
    }
    let mut live = vec![true; n];
    let mut junk: Vec<usize> = Vec::new();
    let mut pieces: Vec<VertexSet> = Vec::new();
    let mut provenance = Vec::new();
    let mut log = Vec::new();
    let cap_iterations = n.max(1);
    let mut iterations = 0;

    loop {
        let live_set = VertexSet::from_mask(&live);
        if live_set.is_empty() {
            break;
        }
        let Some(t) = find_sparse_cut_in(g, &live_set, p.big_c(), exact_cap)? else {
            log.push(Step::Remainder {
                piece_size: live_set.len(),
            });
            pieces.push(live_set);
            provenance.push(Provenance::Remainder);
            break;
        };
        iterations += 1;
        if iterations > cap_iterations {
            return Err(Error::IterationCap(cap_iterations));
        }
        let measure = t.len() as f64 / n as f64;
        let rep = level_set_replacement(g, &t, p)?;
        if rep.good {
            let piece: VertexSet = rep.u.iter().filter(|&v| live[v]).collect();
            for v in piece.iter() {
                live[v] = false;
            }
            log.push(Step::Good {
                t_size: t.len(),
                piece_size: piece.len(),
                measure,
            });
            provenance.push(Provenance::LevelSet {
                t,
                u: rep.u,
                threshold: rep.threshold,
            });
            pieces.push(piece);
        } else {
            let ball = g.ball_of_set(&t, 3 * p.k())?;
            let added: Vec<usize> = ball.iter().filter(|&v| live[v]).collect();
            for &v in &added {
                live[v] = false;
            }
            log.push(Step::Bad {
                t_size: t.len(),
                junk_added: added.len(),
                measure,
            });
            junk.extend(added);
        }
    }

    let mut kept = Vec::new();
    let mut kept_prov = Vec::new();
    for (piece, prov) in pieces.into_iter().zip(provenance) {
        let boundary = g.boundary_size(&piece)?;
        if boundary as f64 >= p.alpha() * piece.len() as f64 {
            log.push(Step::MergedIntoJunk {
                piece_size: piece.len(),
                boundary,
            });
            junk.extend(piece.iter());
        } else {
            kept.push(piece);
            kept_prov.push(prov);
        }
    }
    let dec = Decomposition {
        junk: VertexSet::new(junk),
        pieces: kept,
        provenance: kept_prov,
        log,
    };
    let cert = certify(g, &dec, p, exact_cap)?;
    Ok((dec, cert))
}
