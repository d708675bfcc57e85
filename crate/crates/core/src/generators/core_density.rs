//! Density of the `R`-neighbourhood of the complement of a core candidate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BoxSpace, VertexSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoreDensity {
    pub radius: usize,
    /// `|B_R(X_i ∖ Y_i)| / |X_i|`
    pub densities: Vec<f64>,
    pub ball_sizes: Vec<usize>,
    pub complement_sizes: Vec<usize>,
    /// `d^{R+1} |X_i ∖ Y_i| / |X_i|`
    pub bounds: Vec<f64>,
    /// Integer comparison `|B_R| ≤ d^{R+1} |Y^c|` per index.
    pub holds: Vec<bool>,
}

impl CoreDensity {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

/// The ball-growth comparison needs `d ≥ 2`; for `d ≤ 1` the bound can fail
/// and is reported as such.
pub fn core_density(x: &BoxSpace, ys: &[VertexSet], radius: usize) -> Result<CoreDensity> {
    if ys.len() != x.len() {
        return Err(Error::InvalidArgument(format!("{} sets for {} graphs", ys.len(), x.len())));
    }
    let d = x.degree_bound() as u128;
    let factor = u32::try_from(radius + 1)
        .ok()
        .and_then(|e| d.checked_pow(e))
        .unwrap_or(u128::MAX);
    let mut out = CoreDensity {
        radius,
        densities: Vec::with_capacity(x.len()),
        ball_sizes: Vec::with_capacity(x.len()),
        complement_sizes: Vec::with_capacity(x.len()),
        bounds: Vec::with_capacity(x.len()),
        holds: Vec::with_capacity(x.len()),
    };
    for (g, y) in x.graphs().iter().zip(ys) {
        y.check_range(g.n())?;
        let comp = y.complement(g.n());
        let ball = g.ball_of_set(&comp, radius)?.len();
        let n = g.n().max(1) as f64;
        out.densities.push(ball as f64 / n);
        out.bounds.push(factor as f64 * comp.len() as f64 / n);
        out.holds.push(ball as u128 <= factor.saturating_mul(comp.len() as u128));
        out.ball_sizes.push(ball);
        out.complement_sizes.push(comp.len());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::families::cycle;

    #[test]
    fn density_examples() {
        let x = BoxSpace::from_graphs(vec![cycle(10).unwrap(), cycle(20).unwrap()]);
        let full: Vec<VertexSet> = x.graphs().iter().map(|g| VertexSet::full(g.n())).collect();
        let r = core_density(&x, &full, 2).unwrap();
        assert_eq!(r.densities, vec![0.0, 0.0]);

        let one: Vec<VertexSet> = x.graphs().iter().map(|g| VertexSet::singleton(0).complement(g.n())).collect();
        let r = core_density(&x, &one, 1).unwrap();
        assert_eq!(r.ball_sizes, vec![3, 3]);
        assert!(r.densities[0] <= 3.0 / 10.0 && r.all_hold());

        let none = vec![VertexSet::empty(), VertexSet::empty()];
        let r = core_density(&x, &none, 3).unwrap();
        assert_eq!(r.densities, vec![1.0, 1.0]);
    }
}
