//! Deterministic and random graph families used by tests, examples and the CLI.

use rand::Rng;

use super::{is_connected, Graph};
use crate::error::{Error, Result};

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0))).expect("valid path")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 nodes");
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).expect("valid cycle")
}

pub fn complete(n: usize) -> Graph {
    let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, 1.0)));
    Graph::from_edges(n, edges).expect("valid complete graph")
}

/// Star with one center (node 0) and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i, 1.0))).expect("valid star")
}

/// Erdős–Rényi `G(n, p)` conditioned on connectivity by rejection.
pub fn gnp_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    for _ in 0..10_000 {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j, 1.0));
                }
            }
        }
        let g = Graph::from_edges(n, edges)?;
        if is_connected(&g) {
            return Ok(g);
        }
    }
    Err(Error::Exhausted { attempts: 10_000 })
}

/// Connected graph with exactly `m` unit edges: a random recursive spanning
/// tree plus uniformly chosen extra pairs.
pub fn gnm_connected<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    let max_edges = n * (n - 1) / 2;
    if m + 1 < n || m > max_edges {
        return Err(Error::Domain(format!("no connected simple graph with {n} nodes and {m} edges")));
    }
    let mut present = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        present.insert((j, i));
    }
    while present.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            present.insert((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(n, present.into_iter().map(|(a, b)| (a, b, 1.0)))
}

/// Two-or-more community random graph (planted partition), connected by rejection.
///
/// Nodes are assigned to blocks in order; pairs inside a block are linked
/// with probability `p_in`, pairs across blocks with `p_out`.
pub fn planted_partition<R: Rng + ?Sized>(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    rng: &mut R,
) -> Result<Graph> {
    let n: usize = block_sizes.iter().sum();
    let block: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    for _ in 0..10_000 {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if block[i] == block[j] { p_in } else { p_out };
                if rng.random::<f64>() < p {
                    edges.push((i, j, 1.0));
                }
            }
        }
        let g = Graph::from_edges(n, edges)?;
        if is_connected(&g) {
            return Ok(g);
        }
    }
    Err(Error::Exhausted { attempts: 10_000 })
}
