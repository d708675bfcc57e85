use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gapbox::generators::{bridged_margulis, complete, cycle, octahedron, triangular_torus};
use gapbox::io::{save_box_space, write_edge_list};
use gapbox::{BoxSpace, Graph};
use serde_json::Value;
use tempfile::TempDir;

fn gapbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapbox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn save(dir: &Path, graphs: Vec<Graph>) -> PathBuf {
    save_box_space(dir, "in", &BoxSpace::from_graphs(graphs)).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn spectrum_of_complete_graphs() {
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![complete(4), complete(5), complete(7)]);
    let out = tmp.path().join("out");
    let r = gapbox(&["spectrum", "--input", s(&m), "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rows = csv_rows(&out.join("spectrum.csv"));
    assert_eq!(rows.len(), 3);
    for (row, n) in rows.iter().zip([4.0, 5.0, 7.0]) {
        let gap: f64 = row[2].parse().unwrap();
        assert!((gap - n).abs() < 1e-9, "{gap} vs {n}");
    }
    let first = read_json(&out.join("spectrum_000.json"));
    assert!(first["markov"]["eigenvalues"].is_array());
    assert!(first["delta_tau"]["eigenvalues"].is_array());
}

#[test]
fn empty_manifest_gives_empty_csv() {
    let tmp = TempDir::new().unwrap();
    let m = tmp.path().join("manifest.json");
    fs::write(&m, "[]").unwrap();
    let out = tmp.path().join("out");
    let r = gapbox(&["spectrum", "--input", s(&m), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0));
    assert!(csv_rows(&out.join("spectrum.csv")).is_empty());
}

#[test]
fn malformed_edge_line_reports_line_number() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("g.edges"), "4 3\n0 1\n1 x\n").unwrap();
    let m = tmp.path().join("manifest.json");
    fs::write(&m, r#"[{"path": "g.edges"}]"#).unwrap();
    let r = gapbox(&["spectrum", "--input", s(&m), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 3"));
}

#[test]
fn missing_input_file_is_io_error() {
    let tmp = TempDir::new().unwrap();
    let m = tmp.path().join("manifest.json");
    fs::write(&m, r#"[{"path": "absent.edges"}]"#).unwrap();
    let r = gapbox(&["cheeger", "--input", s(&m), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![complete(5), octahedron(), cycle(9).unwrap()]);
    for cmd in ["spectrum", "cheeger", "zuk", "decompose"] {
        let a = tmp.path().join(format!("{cmd}_a"));
        let b = tmp.path().join(format!("{cmd}_b"));
        for out in [&a, &b] {
            let r = gapbox(&[cmd, "--input", s(&m), "--out", s(out), "--seed", "7"]);
            assert!(r.status.success(), "{cmd}: {}", String::from_utf8_lossy(&r.stderr));
        }
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names.iter().filter(|n| *n != "run_meta.json") {
            assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{cmd} {name:?}");
        }
    }
}

#[test]
fn every_output_embeds_the_config_hash() {
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![complete(5), complete(6)]);
    let out = tmp.path().join("out");
    assert!(gapbox(&["cheeger", "--input", s(&m), "--out", s(&out), "--seed", "3"]).status.success());
    let meta = read_json(&out.join("run_meta.json"));
    let hash = meta["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    assert_eq!(meta["seed"], 3);
    for e in fs::read_dir(&out).unwrap() {
        let p = e.unwrap().path();
        assert!(fs::read_to_string(&p).unwrap().contains(&hash), "{p:?}");
    }
    let other = tmp.path().join("other");
    assert!(gapbox(&["cheeger", "--input", s(&m), "--out", s(&other), "--tol", "1e-8"]).status.success());
    assert_ne!(read_json(&other.join("run_meta.json"))["config_hash"].as_str().unwrap(), hash);
}

#[test]
fn expanderize_leaves_expanders_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let k6 = complete(6);
    let m = save(tmp.path(), vec![k6.clone(), Graph::disjoint_union(&[&k6, &k6])]);
    let out = tmp.path().join("out");
    let r = gapbox(&["expanderize", "--input", s(&m), "--out", s(&out), "--allow-infeasible"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for i in 0..2 {
        let a = fs::read(tmp.path().join(format!("in_{i:03}.edges"))).unwrap();
        let b = fs::read(out.join("graphs").join(format!("graph_{i:03}.edges"))).unwrap();
        assert_eq!(a, b);
    }
    for row in csv_rows(&out.join("ratios.csv")) {
        assert!(row[1..].iter().all(|x| x == "1"));
    }
    assert_eq!(read_json(&out.join("edits_001.json"))["edits"], serde_json::json!([]));
}

#[test]
fn expanderize_rejects_infeasible_alpha() {
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![complete(6)]);
    let r = gapbox(&["expanderize", "--input", s(&m), "--out", s(&tmp.path().join("out")), "--alpha", "0.1"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("1/d^(r+1)"));
}

#[test]
fn expanderize_bridged_margulis_writes_ratios() {
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![bridged_margulis(6, 3).unwrap()]);
    let out = tmp.path().join("out");
    let r = gapbox(&[
        "expanderize",
        "--input",
        s(&m),
        "--out",
        s(&out),
        "--allow-infeasible",
        "--min-component",
        "12",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rows = csv_rows(&out.join("ratios.csv"));
    assert_eq!(rows.len(), 1);
    // the junk path is dropped, the pair survives
    let v: f64 = rows[0][1].parse().unwrap();
    assert!((0.9..1.0).contains(&v), "{v}");
    let witness = read_json(&out.join("witness.json"));
    assert_eq!(witness["entries"].as_array().unwrap().len(), 1);
}

#[test]
fn zuk_on_cycles_is_invalid_but_succeeds() {
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![cycle(5).unwrap(), cycle(5).unwrap()]);
    let out = tmp.path().join("out");
    let r = gapbox(&["zuk", "--input", s(&m), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(0));
    let z = read_json(&out.join("zuk_000.json"));
    assert_eq!(z["valid"], false);
    assert!(z["diagnostic"].as_str().unwrap().contains("disconnected"));
}

#[test]
fn zuk_mixed_family_per_index() {
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![octahedron(), cycle(5).unwrap(), triangular_torus(5).unwrap(), complete(6)]);
    let out = tmp.path().join("out");
    assert!(gapbox(&["zuk", "--input", s(&m), "--out", s(&out)]).status.success());
    let rows = csv_rows(&out.join("zuk.csv"));
    let valid: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    assert_eq!(valid, ["true", "false", "false", "true"]);
    let c: f64 = rows[0][3].parse().unwrap();
    assert!((c - 1.0).abs() < 1e-9);
    assert_eq!(rows[0][6], "true");
}

#[test]
fn generate_then_approx_iso_with_itself() {
    let tmp = TempDir::new().unwrap();
    let spec = tmp.path().join("spec.json");
    fs::write(&spec, r#"{"family": "margulis", "params": {"sizes": [4, 5, 6]}}"#).unwrap();
    let gen = tmp.path().join("gen");
    assert!(gapbox(&["generate", "--spec", s(&spec), "--out", s(&gen)]).status.success());
    let m = gen.join("manifest.json");
    assert_eq!(fs::read_to_string(gen.join("graph_000.edges")).unwrap(), write_edge_list(&gapbox::generators::margulis(4).unwrap()));
    let out = tmp.path().join("iso");
    assert!(gapbox(&["approx-iso", "--input", s(&m), "--other", s(&m), "--out", s(&out)]).status.success());
    let report = read_json(&out.join("approx_iso.json"));
    assert_eq!(report["verdict"], true);
}

#[test]
fn sofic_cyclic_defect() {
    let tmp = TempDir::new().unwrap();
    let clean = tmp.path().join("clean");
    let bad = tmp.path().join("bad");
    let base = ["sofic", "--cyclic", "101", "--radius", "50"];
    assert!(gapbox(&[&base[..], &["--out", s(&clean)]].concat()).status.success());
    assert!(gapbox(&[&base[..], &["--out", s(&bad), "--defect", "a", "--seed", "5"]].concat()).status.success());
    assert_eq!(read_json(&clean.join("sofic.json"))["report"]["epsilon_exact"], "0/1");
    assert_eq!(read_json(&bad.join("sofic.json"))["report"]["epsilon_exact"], "1/101");
}

#[test]
fn sofic_action_file_validation() {
    let tmp = TempDir::new().unwrap();
    let action = tmp.path().join("action.json");
    fs::write(&action, r#"{"m": 3, "labels": ["s"], "perms": [[0, 0, 1]], "inverses": ["s"]}"#).unwrap();
    let r = gapbox(&["sofic", "--action", s(&action), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn invalid_flags_exit_two() {
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![complete(4)]);
    for args in [["--alpha", "1.5"], ["--tol", "0"], ["--gap", "-1"], ["--exact-cap", "30"]] {
        let r = gapbox(&[&["decompose", "--input", s(&m), "--out", s(&tmp.path().join("out"))][..], &args[..]].concat());
        assert_eq!(r.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn rewire_single_piece() {
    // C_20 with a pendant vertex 20 on 0; the piece is the cycle
    let mut e: Vec<(usize, usize)> = (0..20).map(|i| (i, (i + 1) % 20)).collect();
    e.push((0, 20));
    let g = Graph::new(21, &e, 3).unwrap();
    let tmp = TempDir::new().unwrap();
    let m = save(tmp.path(), vec![g]);
    let out = tmp.path().join("out");
    let piece = (0..20).map(|i| i.to_string()).collect::<Vec<_>>().join(",");
    let r = gapbox(&[
        "rewire", "--input", s(&m), "--out", s(&out), "--piece", &piece, "--big-c", "0.2", "--alpha", "0.1",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let res = read_json(&out.join("rewire.json"));
    assert_eq!(res["result"]["edits"].as_array().unwrap().len(), 3);
    assert!(out.join("rewired.edges").exists());
}
