#![allow(dead_code)]

use fiedler_core::Graph;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Connected weighted graphs: a random tree plus random extra edges.
pub fn arb_graph(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (2..=max_nodes).prop_flat_map(|n| {
        let parents: Vec<_> = (1..n).map(|i| (0..i, 0.1f64..5.0)).collect();
        let extra = proptest::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..2 * n);
        (Just(n), parents, extra).prop_map(|(n, parents, extra)| {
            let mut edges = std::collections::BTreeMap::new();
            for (i, (p, w)) in parents.into_iter().enumerate() {
                edges.insert((p, i + 1), w);
            }
            for (u, v, w) in extra {
                if u != v {
                    edges.entry((u.min(v), u.max(v))).or_insert(w);
                }
            }
            Graph::from_edges(n, edges.into_iter().map(|((u, v), w)| (u, v, w))).unwrap()
        })
    })
}

/// `D - W` built straight from the edge list.
pub fn laplacian_oracle(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut l = DMatrix::zeros(n, n);
    for (u, v, w) in g.edges() {
        l[(u, v)] -= w;
        l[(v, u)] -= w;
        l[(u, u)] += w;
        l[(v, v)] += w;
    }
    l
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn project_out_ones(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}
