//! Graph families, Cayley graphs, sofic verification, approximate
//! isomorphisms and core densities.

pub mod approx_iso;
pub mod cayley;
pub mod core_density;
pub mod families;
pub mod sofic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BoxSpace, Graph, VertexSet};

pub use approx_iso::{approx_iso_check, ApproxIsoReport, ApproxIsoWitness, IndexWitness, IsoRatios};
pub use cayley::{cayley_graph, FiniteGroup};
pub use core_density::{core_density, CoreDensity};
pub use families::{
    complete, complete_multipartite, cycle, glue_pair, glued_expander, margulis, octahedron, path,
    triangular_torus,
};
pub use sofic::{sofic_verify, PermAction, Relation, SoficReport};

/// `{family, params, seed}`. `params` is either a list of sizes or an
/// object with a `sizes` list (plus `junk` for `bridged_margulis`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default)]
    pub seed: u64,
}

fn sizes(params: &serde_json::Value) -> Result<Vec<usize>> {
    let list = match params {
        serde_json::Value::Array(_) => params,
        serde_json::Value::Object(map) => map
            .get("sizes")
            .ok_or_else(|| Error::InvalidArgument("params needs a \"sizes\" list".into()))?,
        _ => return Err(Error::InvalidArgument("params must be a list or an object".into())),
    };
    serde_json::from_value(list.clone()).map_err(|e| Error::InvalidArgument(format!("sizes: {e}")))
}

/// Two Margulis graphs joined at their `(0, 0)` vertices, plus an optional
/// path of `junk` vertices as a separate component.
pub fn bridged_margulis(n: usize, junk: usize) -> Result<Graph> {
    let m = margulis(n)?;
    let pair = glue_pair(&m, &m, 0, 0)?;
    if junk == 0 {
        return Ok(pair);
    }
    let p = path(junk);
    Ok(Graph::disjoint_union(&[&pair, &p]))
}

/// Builds the box space described by `spec`; labels are `family:size`.
pub fn generate(spec: &GeneratorSpec) -> Result<BoxSpace> {
    let sizes = sizes(&spec.params)?;
    let family = spec.family.as_str();
    let build = |n: usize| -> Result<Graph> {
        match family {
            "complete" => Ok(complete(n)),
            "cycle" => cycle(n),
            "path" => Ok(path(n)),
            "octahedron" => Ok(octahedron()),
            "margulis" => margulis(n),
            "triangular_torus" => triangular_torus(n),
            "cyclic_cayley" => cayley_graph(&cayley::Cyclic(n), &[1 % n.max(1), (n.max(1) - 1) % n.max(1)]),
            "sl2" => {
                let g = cayley::Sl2(n);
                cayley_graph(&g, &g.elementary_generators())
            }
            "symmetric" => {
                let gens: Vec<Vec<usize>> = (1..n).map(|i| cayley::transposition(n, i - 1, i)).collect();
                cayley_graph(&cayley::Symmetric(n), &gens)
            }
            "bridged_margulis" => {
                let junk = spec.params.get("junk").and_then(|j| j.as_u64()).unwrap_or(0) as usize;
                bridged_margulis(n, junk)
            }
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    };
    let graphs = sizes.iter().map(|&n| build(n)).collect::<Result<Vec<_>>>()?;
    let d = graphs.iter().map(Graph::degree_bound).max().unwrap_or(0);
    let labels = sizes.iter().map(|n| format!("{family}:{n}")).collect();
    BoxSpace::new(graphs, labels, d)
}

/// Random subset of each graph with `ceil(eps_i · n_i)` vertices removed.
pub fn random_cores(x: &BoxSpace, eps: &[f64], seed: u64) -> Vec<VertexSet> {
    use rand::seq::index::sample;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    x.graphs()
        .iter()
        .zip(eps)
        .map(|(g, &e)| {
            let k = ((e * g.n() as f64).ceil() as usize).min(g.n());
            let out: VertexSet = sample(&mut rng, g.n(), k).into_iter().collect();
            out.complement(g.n())
        })
        .collect()
}
