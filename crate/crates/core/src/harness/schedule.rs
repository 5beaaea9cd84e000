//! Turns a removal schedule from a config into concrete epochs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, DEFAULT_REMOVAL_ATTEMPTS};
use crate::kernel::KernelKind;
use crate::simulator::{resolve_epochs, Epoch, Removal};

/// Which nodes go at a scheduled time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalSpec {
    /// Explicit node labels, as written in the edge list.
    Nodes(Vec<usize>),
    /// A random set of this size that keeps the graph connected.
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub time: f64,
    #[serde(flatten)]
    pub spec: RemovalSpec,
}

/// Schedule with every random count replaced by the labels actually drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSchedule {
    /// Labels are those of the input graph.
    pub removals: Vec<Removal>,
    pub epochs: Vec<Epoch>,
    /// Nodes removed over the whole run divided by the original node count.
    pub removed_fraction: f64,
}

/// Resolves `entries` against `g`, drawing random sets once with `rng` so
/// every run shares the same topology sequence.
pub fn build_dynamic_schedule<R: Rng + ?Sized>(
    g: &Graph,
    kind: KernelKind,
    entries: &[ScheduleEntry],
    horizon: f64,
    rng: &mut R,
) -> Result<ResolvedSchedule> {
    let mut current = g.clone();
    let mut removals = Vec::with_capacity(entries.len());
    let mut last = 0.0;
    for e in entries {
        if !(e.time > last && e.time <= horizon) {
            return Err(Error::Config(format!(
                "removal time {} must exceed the previous one and not exceed T = {horizon}",
                e.time
            )));
        }
        last = e.time;
        let labels: Vec<usize> = match &e.spec {
            RemovalSpec::Nodes(ls) => ls.clone(),
            RemovalSpec::Count(k) => {
                let set = graph::sample_removable_set(&current, *k, rng, DEFAULT_REMOVAL_ATTEMPTS)?;
                set.members().iter().map(|&i| current.labels()[i]).collect()
            }
        };
        let step = resolve_epochs(&current, kind, &[Removal { time: e.time, labels: labels.clone() }])?;
        current = step[1].graph.clone().expect("graph epochs");
        removals.push(Removal { time: e.time, labels });
    }
    let epochs = resolve_epochs(g, kind, &removals)?;
    let removed_fraction = (g.node_count() - current.node_count()) as f64 / g.node_count() as f64;
    Ok(ResolvedSchedule { removals, epochs, removed_fraction })
}
