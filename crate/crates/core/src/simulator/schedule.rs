//! Topology epochs for runs on graphs that lose nodes over time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, NodeSet};
use crate::kernel::{Kernel, KernelKind};

/// Nodes (by original label) deleted at `time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub time: f64,
    pub labels: Vec<usize>,
}

/// A stretch of simulated time with fixed topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub start: f64,
    /// Present for graph-derived kernels.
    pub graph: Option<Graph>,
    pub kernel: Kernel,
    /// Indices, in the previous epoch's numbering, removed at `start`.
    pub removed: NodeSet,
}

/// A single epoch covering the whole run.
pub fn static_epochs(kernel: Kernel, graph: Option<Graph>) -> Vec<Epoch> {
    vec![Epoch { start: 0.0, graph, kernel, removed: NodeSet::default() }]
}

/// Applies `removals` in order, rebuilding the kernel after each one.
///
/// Every intermediate graph must stay connected.
pub fn resolve_epochs(g: &Graph, kind: KernelKind, removals: &[Removal]) -> Result<Vec<Epoch>> {
    let mut epochs = static_epochs(kind.build(g)?, Some(g.clone()));
    let mut last_time = 0.0;
    for r in removals {
        if !(r.time > last_time && r.time.is_finite()) {
            return Err(Error::Config("removal times must be positive and strictly increasing".into()));
        }
        last_time = r.time;
        let current = epochs.last().unwrap().graph.as_ref().expect("graph epochs");
        let mut indices = Vec::with_capacity(r.labels.len());
        for &label in &r.labels {
            let i = current.index_of_label(label).ok_or_else(|| {
                Error::Config(format!("node label {label} is not present at t = {}", r.time))
            })?;
            indices.push(i);
        }
        let removed = NodeSet::new(indices, current.node_count())?;
        let next = graph::remove_nodes(current, &removed)?;
        if !graph::is_connected(&next) {
            return Err(Error::Disconnected(format!("removal at t = {} disconnects the graph", r.time)));
        }
        let kernel = kind.build(&next)?;
        epochs.push(Epoch { start: r.time, graph: Some(next), kernel, removed });
    }
    Ok(epochs)
}
