use std::fs;
use std::path::Path;

use gapbox::cheeger::{cheeger_exact, cheeger_sandwich_check, cheeger_sweep};
use gapbox::decompose::{kun_partition, KunParams};
use gapbox::generators::approx_iso::{approx_iso_check, ApproxIsoWitness};
use gapbox::generators::sofic::{cyclic_action, cyclic_fixed_words, cyclic_relations};
use gapbox::generators::{generate, sofic_verify, GeneratorSpec, PermAction, Relation};
use gapbox::io::{load_box_space, save_box_space, write_edge_list};
use gapbox::rewire::{expanderize, feasibility, rewire_piece};
use gapbox::spectral::{laplacian, laplacian_gap, markov, spectrum};
use gapbox::zuk::{delta_tau, verify_zuk_gap, zuk_certificate};
use gapbox::{BoxSpace, Error, Graph, VertexSet};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::{fmt_opt, CmdResult, Failure, Sink};
use crate::{Cli, Command};

const GAP_TOL: f64 = 1e-10;

pub fn dispatch(cli: &Cli, sink: &Sink) -> CmdResult {
    match &cli.command {
        Command::Spectrum { k } => spectrum_cmd(cli, sink, *k),
        Command::Cheeger => cheeger_cmd(cli, sink),
        Command::Decompose => decompose_cmd(cli, sink),
        Command::Rewire { index, piece, big_c } => rewire_cmd(cli, sink, *index, piece, *big_c),
        Command::Expanderize {
            allow_infeasible,
            iso_tol,
        } => expanderize_cmd(cli, sink, *allow_infeasible, *iso_tol),
        Command::Zuk => zuk_cmd(cli, sink),
        Command::Generate { spec } => generate_cmd(cli, sink, spec),
        Command::Sofic {
            action,
            cyclic,
            radius,
            defect,
        } => sofic_cmd(sink, action.as_deref(), *cyclic, *radius, defect.as_deref()),
        Command::ApproxIso {
            other,
            witness,
            iso_tol,
        } => approx_iso_cmd(cli, sink, other, witness.as_deref(), *iso_tol),
    }
}

fn input(cli: &Cli) -> CmdResult<BoxSpace> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| Failure::validation("--input is required"))?;
    Ok(load_box_space(path)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CmdResult<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure {
        code: crate::output::EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Failure::validation(format!("{}: line {}: {e}", path.display(), e.line())))
}

/// `--gap`, or the smallest measured gap over the space.
fn kun_params(cli: &Cli, x: &BoxSpace) -> CmdResult<KunParams> {
    let c = match cli.gap {
        Some(c) => c,
        None => {
            if x.is_empty() {
                return Err(Failure::validation("cannot measure a gap on an empty box space; pass --gap"));
            }
            let gaps = x
                .graphs()
                .par_iter()
                .map(|g| laplacian_gap::<f64>(g, GAP_TOL))
                .collect::<Result<Vec<_>, Error>>()?;
            let c = gaps.into_iter().fold(f64::INFINITY, f64::min);
            if !(c > GAP_TOL) {
                return Err(Failure::validation("measured gap is 0; pass --gap"));
            }
            c
        }
    };
    Ok(KunParams::new(c, x.degree_bound().max(1), cli.alpha)?)
}

fn params_json(p: &KunParams) -> Value {
    json!({
        "c": p.c(),
        "d": p.d(),
        "alpha": p.alpha(),
        "c_m": p.c_m(),
        "big_c": p.big_c(),
        "k": p.k(),
        "log10_delta": p.log10_delta(),
        "good_threshold": p.good_threshold(),
    })
}

fn spectrum_cmd(cli: &Cli, sink: &Sink, k: usize) -> CmdResult {
    let x = input(cli)?;
    let d = x.degree_bound().max(1);
    let tol = cli.tol;
    let reports = x
        .graphs()
        .par_iter()
        .map(|g| -> Result<Value, Error> {
            let k = k.min(g.n()).max(1);
            let lap = spectrum(&laplacian::<f64>(g), k, tol)?;
            let mk = spectrum(&markov::<f64>(g, d)?, k, tol)?;
            let dt = spectrum(&delta_tau::<f64>(g), k, tol)?;
            Ok(json!({ "laplacian": lap, "markov": mk, "delta_tau": dt }))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows = Vec::new();
    for (i, (g, mut r)) in x.graphs().iter().zip(reports).enumerate() {
        rows.push(vec![i.to_string(), g.n().to_string(), r["laplacian"]["gap"].to_string()]);
        r["index"] = json!(i);
        r["label"] = json!(x.labels()[i]);
        r["n"] = json!(g.n());
        r["d"] = json!(d);
        sink.json(&format!("spectrum_{i:03}.json"), &r)?;
    }
    sink.csv("spectrum.csv", &["index", "n", "gap"], &rows)
}

fn cheeger_cmd(cli: &Cli, sink: &Sink) -> CmdResult {
    let x = input(cli)?;
    let cap = cli.exact_cap;
    let tol = cli.tol;
    let reports = x
        .graphs()
        .par_iter()
        .map(|g| -> Result<Value, Error> {
            let exact = g.n() <= cap;
            let report = if exact {
                cheeger_exact::<f64>(g)?
            } else {
                cheeger_sweep::<f64>(g)?
            };
            let sandwich = cheeger_sandwich_check::<f64>(g, exact, tol)?;
            Ok(json!({ "report": report, "sandwich": sandwich, "sandwich_holds": sandwich.holds() }))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows = Vec::new();
    for (i, (g, mut r)) in x.graphs().iter().zip(reports).enumerate() {
        let rep = &r["report"];
        rows.push(vec![
            i.to_string(),
            g.n().to_string(),
            rep["method"].as_str().unwrap_or_default().to_string(),
            fmt_opt(rep["h"].as_f64()),
            rep["lower_bound"].to_string(),
            rep["upper_bound"].to_string(),
        ]);
        r["index"] = json!(i);
        r["label"] = json!(x.labels()[i]);
        sink.json(&format!("cheeger_{i:03}.json"), &r)?;
    }
    sink.csv("cheeger.csv", &["index", "n", "method", "h", "lower", "upper"], &rows)
}

fn decompose_cmd(cli: &Cli, sink: &Sink) -> CmdResult {
    let x = input(cli)?;
    let p = kun_params(cli, &x)?;
    let cap = cli.exact_cap;
    let results = x
        .graphs()
        .par_iter()
        .map(|g| kun_partition(g, &p, cap))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows = Vec::new();
    for (i, (g, (dec, cert))) in x.graphs().iter().zip(results).enumerate() {
        rows.push(vec![
            i.to_string(),
            g.n().to_string(),
            dec.pieces.len().to_string(),
            cert.junk_ratio.to_string(),
            cert.pass.to_string(),
        ]);
        let body = json!({
            "index": i,
            "label": x.labels()[i],
            "params": params_json(&p),
            "decomposition": dec,
            "certificate": cert,
        });
        sink.json(&format!("decompose_{i:03}.json"), &body)?;
    }
    sink.csv("decompose.csv", &["index", "n", "pieces", "junk_ratio", "pass"], &rows)
}

fn rewire_cmd(cli: &Cli, sink: &Sink, index: usize, piece: &[usize], big_c: Option<f64>) -> CmdResult {
    let x = input(cli)?;
    let g = x
        .get(index)
        .ok_or_else(|| Failure::validation(format!("index {index} out of range for {} graphs", x.len())))?;
    let big_c = match big_c {
        Some(c) if c > 0.0 => c,
        Some(c) => return Err(Failure::validation(format!("--big-c must be positive, got {c}"))),
        None => kun_params(cli, &x)?.big_c(),
    };
    let piece = VertexSet::new(piece.to_vec());
    piece.check_range(g.n())?;
    let res = rewire_piece(g, &piece, big_c, cli.alpha)?;
    fs::write(sink.dir().join("rewired.edges"), write_edge_list(&res.new_graph))?;
    let body = json!({ "index": index, "big_c": big_c, "alpha": cli.alpha, "result": res });
    sink.json("rewire.json", &body)
}

fn expanderize_cmd(cli: &Cli, sink: &Sink, allow_infeasible: bool, iso_tol: f64) -> CmdResult {
    let x = input(cli)?;
    let p = kun_params(cli, &x)?;
    let feas = feasibility(p.alpha(), p.big_c(), p.d());
    if !feas.feasible && !allow_infeasible {
        return Err(Failure::validation(format!(
            "alpha = {} is not below 1/d^(r+1) = 10^{:.1} (d = {}, r = {}); pass --allow-infeasible to run anyway",
            p.alpha(),
            -((feas.r + 1) as f64) * (p.d() as f64).log10(),
            p.d(),
            feas.r
        )));
    }
    let out = expanderize(&x, &p, cli.min_component, cli.exact_cap)?;
    save_box_space(&sink.dir().join("graphs"), "graph", &out.space)?;
    sink.json("witness.json", &out.witness)?;
    for r in &out.reports {
        let edits: Vec<_> = r.rewired.iter().flat_map(|res| res.edits.iter()).collect();
        sink.json(&format!("edits_{:03}.json", r.index), &json!({ "index": r.index, "edits": edits }))?;
    }
    let iso = approx_iso_check(&x, &out.space, &out.witness, iso_tol)?;
    sink.json(
        "reports.json",
        &json!({
            "params": params_json(&p),
            "feasibility": feas,
            "min_component": cli.min_component,
            "reports": out.reports,
            "approx_iso": iso,
        }),
    )?;
    let rows: Vec<Vec<String>> = iso
        .ratios
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                r.vertices.to_string(),
                r.vertices_prime.to_string(),
                r.edges.to_string(),
                r.edges_prime.to_string(),
            ]
        })
        .collect();
    sink.csv(
        "ratios.csv",
        &["index", "vertices", "vertices_prime", "edges", "edges_prime"],
        &rows,
    )
}

/// Certificate for one graph; a disconnected link is a finding, not an error.
fn zuk_one(g: &Graph, tol: f64) -> Result<Value, Error> {
    match zuk_certificate::<f64>(g, None, tol) {
        Ok(cert) => {
            let gap = if cert.valid {
                Some(verify_zuk_gap::<f64>(g, tol)?)
            } else {
                None
            };
            Ok(json!({ "valid": cert.valid, "certificate": cert, "gap_check": gap, "diagnostic": null }))
        }
        Err(e @ Error::DisconnectedLink(_)) => Ok(json!({
            "valid": false,
            "certificate": null,
            "gap_check": null,
            "diagnostic": e.to_string(),
        })),
        Err(e) => Err(e),
    }
}

fn zuk_cmd(cli: &Cli, sink: &Sink) -> CmdResult {
    let x = input(cli)?;
    let tol = cli.tol;
    let results = x
        .graphs()
        .par_iter()
        .map(|g| zuk_one(g, tol))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut rows = Vec::new();
    for (i, (g, mut r)) in x.graphs().iter().zip(results).enumerate() {
        rows.push(vec![
            i.to_string(),
            g.n().to_string(),
            fmt_opt(r["certificate"]["min_lambda"].as_f64()),
            fmt_opt(r["certificate"]["c"].as_f64()),
            r["valid"].to_string(),
            fmt_opt(r["gap_check"]["gap"].as_f64()),
            r["gap_check"]["passes"].as_bool().unwrap_or(false).to_string(),
        ]);
        r["index"] = json!(i);
        r["label"] = json!(x.labels()[i]);
        sink.json(&format!("zuk_{i:03}.json"), &r)?;
    }
    sink.csv("zuk.csv", &["index", "n", "min_lambda", "c", "valid", "gap", "passes"], &rows)
}

fn generate_cmd(cli: &Cli, sink: &Sink, spec_path: &Path) -> CmdResult {
    let mut spec: GeneratorSpec = read_json(spec_path)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let x = generate(&spec)?;
    save_box_space(sink.dir(), "graph", &x)?;
    sink.json(
        "generate.json",
        &json!({ "spec": spec, "sizes": x.sizes(), "labels": x.labels(), "d": x.degree_bound() }),
    )
}

#[derive(Deserialize)]
struct ActionFile {
    m: usize,
    labels: Vec<String>,
    perms: Vec<Vec<usize>>,
    inverses: Vec<String>,
    #[serde(default)]
    relations: Vec<Relation>,
    #[serde(default)]
    fixed_words: Vec<String>,
}

fn sofic_cmd(
    sink: &Sink,
    action: Option<&Path>,
    cyclic: Option<usize>,
    radius: usize,
    defect: Option<&str>,
) -> CmdResult {
    let (a, relations, words) = match (action, cyclic) {
        (Some(path), _) => {
            let f: ActionFile = read_json(path)?;
            (PermAction::new(f.m, f.labels, f.perms, f.inverses)?, f.relations, f.fixed_words)
        }
        (None, Some(n)) if n >= 2 => (cyclic_action(n), cyclic_relations(n, radius), cyclic_fixed_words(n, radius)),
        (None, Some(n)) => return Err(Failure::validation(format!("--cyclic needs N ≥ 2, got {n}"))),
        (None, None) => return Err(Failure::validation("pass --action or --cyclic")),
    };
    let (a, defect_point) = match defect {
        Some(label) => {
            let (b, p) = a.inject_defect(label, sink.seed)?;
            (b, Some(p))
        }
        None => (a, None),
    };
    let report = sofic_verify(&a, &relations, &words)?;
    sink.json(
        "sofic.json",
        &json!({ "m": a.m(), "defect": defect, "defect_point": defect_point, "report": report }),
    )
}

fn approx_iso_cmd(cli: &Cli, sink: &Sink, other: &Path, witness: Option<&Path>, iso_tol: f64) -> CmdResult {
    let x = input(cli)?;
    let x2 = load_box_space(other)?;
    let w = match witness {
        Some(p) => read_json::<ApproxIsoWitness>(p)?,
        None => ApproxIsoWitness::identity(&x),
    };
    let report = approx_iso_check(&x, &x2, &w, iso_tol)?;
    let rows: Vec<Vec<String>> = report
        .ratios
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), r.min().to_string()])
        .collect();
    sink.json("approx_iso.json", &report)?;
    sink.csv("approx_iso.csv", &["index", "min_ratio"], &rows)
}
