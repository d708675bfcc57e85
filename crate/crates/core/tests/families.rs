use gapbox::cheeger::cheeger_exact;
use gapbox::generators::cayley::{cayley_graph, Cyclic, FiniteGroup, Product, Sl2, Symmetric};
use gapbox::generators::{bridged_margulis, glue_pair, margulis};
use gapbox::spectral::{laplacian, laplacian_gap, spectrum};
use gapbox::{Graph, Ratio};

fn relabel(g: &Graph, perm: &[usize]) -> Graph {
    let edges: Vec<(usize, usize)> = g.edges().map(|(u, v)| (perm[u], perm[v])).collect();
    Graph::new(g.n(), &edges, g.degree_bound()).unwrap()
}

#[test]
fn margulis_measured_gaps() {
    let g8 = laplacian_gap::<f64>(&margulis(8).unwrap(), 1e-10).unwrap();
    let g16 = laplacian_gap::<f64>(&margulis(16).unwrap(), 1e-10).unwrap();
    assert!(g8 > 0.5);
    assert!((g8 - 0.98398).abs() < 1e-5);
    assert!((g16 - 0.58576).abs() < 1e-5);
}

#[test]
fn margulis_gap_floor() {
    for n in 4..=24 {
        let gap = laplacian_gap::<f64>(&margulis(n).unwrap(), 1e-9).unwrap();
        assert!(gap >= 0.3, "n = {n}: gap {gap}");
        println!("margulis({n}) gap {gap:.5}");
    }
}

#[test]
fn cayley_graphs_are_regular_and_relabel_invariant() {
    let graphs = vec![
        cayley_graph(&Cyclic(9), &[1, 8, 3, 6]).unwrap(),
        cayley_graph(&Product(vec![3, 4]), &[vec![1, 0], vec![2, 0], vec![0, 1], vec![0, 3]]).unwrap(),
        {
            let g = Symmetric(4);
            let gens: Vec<Vec<usize>> = g.elements().into_iter().filter(|p| {
                p.iter().enumerate().filter(|&(i, &x)| i != x).count() == 2
            }).collect();
            cayley_graph(&g, &gens).unwrap()
        },
        {
            let g = Sl2(3);
            cayley_graph(&g, &g.elementary_generators()).unwrap()
        },
    ];
    for g in &graphs {
        let d = g.degree(0);
        assert!((0..g.n()).all(|v| g.degree(v) == d));
        let perm: Vec<usize> = (0..g.n()).map(|i| (i * 5 + 2) % g.n()).collect();
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        let perm = if seen.len() == g.n() { perm } else { (0..g.n()).rev().collect() };
        let a = spectrum(&laplacian::<f64>(g), g.n(), 1e-10).unwrap().eigenvalues;
        let b = spectrum(&laplacian::<f64>(&relabel(g, &perm)), g.n(), 1e-10).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn glued_margulis_loses_expansion() {
    let m = margulis(8).unwrap();
    let glued = glue_pair(&m, &m, 0, 0).unwrap();
    assert_eq!(glued, bridged_margulis(8, 0).unwrap());
    let single = laplacian_gap::<f64>(&m, 1e-10).unwrap();
    let both = laplacian_gap::<f64>(&glued, 1e-10).unwrap();
    assert!(both < single);
    // the bridge cut has |∂S|/|S| = 1/64
    let half: gapbox::VertexSet = (0..64).collect();
    assert_eq!(glued.boundary_size(&half).unwrap(), 1);
}

#[test]
fn glue_cheeger_below_bridge_bound() {
    for (a, b) in [(3usize, 4usize), (4, 4), (5, 6)] {
        let ka = gapbox::generators::complete(a).with_degree_bound(6).unwrap();
        let kb = gapbox::generators::complete(b).with_degree_bound(6).unwrap();
        let g = glue_pair(&ka, &kb, 0, b - 1).unwrap();
        let h = cheeger_exact::<f64>(&g).unwrap().h.unwrap();
        assert!(h <= Ratio::new(1, a.min(b) as u64));
    }
}
