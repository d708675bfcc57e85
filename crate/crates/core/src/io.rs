//! Edge-list text format and box-space manifests.
//!
//! Edge lists start with a header line `n d`, followed by one `u v` pair per
//! line. A pair `v v` denotes a self-loop. Blank lines and lines starting
//! with `#` are ignored. Manifests are JSON arrays of `{path, label}` with
//! paths resolved relative to the manifest's directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BoxSpace, Graph};

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header `n d`".into(),
    })?;
    let (n, d) = parse_pair(hline, header)?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let (u, v) = parse_pair(line, l)?;
        if u >= n || v >= n {
            return Err(Error::Parse {
                line,
                message: format!("vertex out of range for n = {n}"),
            });
        }
        edges.push((u, v));
    }
    // Re-run the edge checks one at a time only on failure, to report a line.
    Graph::with_loops(n, &edges, &[], d).map_err(|e| {
        let line = locate(text, &edges, n, d).unwrap_or(hline);
        Error::Parse {
            line,
            message: e.to_string(),
        }
    })
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse {
                line,
                message: "expected two integers".into(),
            })?
            .parse::<usize>()
            .map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line,
            message: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

/// Line number of the first edge whose addition makes the graph invalid.
fn locate(text: &str, edges: &[(usize, usize)], n: usize, d: usize) -> Option<usize> {
    let edge_lines: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .map(|(i, _)| i + 1)
        .skip(1)
        .collect();
    (1..=edges.len())
        .find(|&k| Graph::with_loops(n, &edges[..k], &[], d).is_err())
        .map(|k| edge_lines[k - 1])
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.degree_bound());
    let mut pairs: Vec<(usize, usize)> = g.edges().collect();
    pairs.extend((0..g.n()).filter(|&v| g.has_loop(v)).map(|v| (v, v)));
    pairs.sort_unstable();
    for (u, v) in pairs {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_edge_list(&text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    #[serde(default)]
    pub label: String,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

/// Loads every graph of a manifest. The shared degree bound is the largest
/// member bound.
pub fn load_box_space(manifest: &Path) -> Result<BoxSpace> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    let entries = read_manifest(manifest)?;
    let mut graphs = Vec::with_capacity(entries.len());
    let mut labels = Vec::with_capacity(entries.len());
    for e in entries {
        let p = if e.path.is_absolute() {
            e.path.clone()
        } else {
            base.join(&e.path)
        };
        let g = read_edge_list(&p).map_err(|err| match err {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", p.display()),
            },
            other => other,
        })?;
        graphs.push(g);
        labels.push(e.label);
    }
    let d = graphs.iter().map(Graph::degree_bound).max().unwrap_or(0);
    BoxSpace::new(graphs, labels, d)
}

/// Writes each member as `<stem>_<index>.edges` next to a `manifest.json`.
pub fn save_box_space(dir: &Path, stem: &str, space: &BoxSpace) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (i, (g, label)) in space.graphs().iter().zip(space.labels()).enumerate() {
        let name = format!("{stem}_{i:03}.edges");
        fs::write(dir.join(&name), write_edge_list(g))?;
        entries.push(ManifestEntry {
            path: PathBuf::from(name),
            label: label.clone(),
        });
    }
    let manifest = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&entries).expect("manifest serializes");
    fs::write(&manifest, json + "\n")?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_write() {
        let g = parse_edge_list("4 2\n0 1\n1 2\n\n# comment\n2 3\n3 0\n").unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(write_edge_list(&g), "4 2\n0 1\n0 3\n1 2\n2 3\n");
    }

    #[test]
    fn loops_round_trip() {
        let g = parse_edge_list("2 2\n0 1\n1 1\n").unwrap();
        assert!(g.has_loop(1));
        assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = parse_edge_list("3 2\n0 1\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_edge_list("3 1\n0 1\n\n1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
        let err = parse_edge_list("").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
