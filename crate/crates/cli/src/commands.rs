use std::io::Write;
use std::path::Path;

use fiedler_core::graph::{self, NodeSet};
use fiedler_core::harness::{self, CompareConfig, ExperimentConfig, Topology, TopologySpec};
use fiedler_core::ode::{self, deviation_bound, DeviationBoundInputs, DtPolicy, IntegrateOptions};
use fiedler_core::rng::{run_stream, simplex_point};
use fiedler_core::{spectral, Error};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::{CliError, CliResult, GlobalOpts};

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?)
}

fn config_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn apply_index_base(g: &GlobalOpts, spec: &mut TopologySpec) {
    if let Some(b) = g.index_base {
        spec.index_base = b;
    }
}

/// Node names for output: graph labels when there is a graph, otherwise
/// state indices in the configured base.
fn node_names(topo: &Topology, index_base: u8) -> Vec<usize> {
    match &topo.graph {
        Some(g) => g.labels().to_vec(),
        None => (0..topo.kernel.size()).map(|i| i + index_base as usize).collect(),
    }
}

pub fn simulate(g: &GlobalOpts, dynamic: bool) -> CliResult<()> {
    let mut cfg = ExperimentConfig::from_path(g.config()?)?;
    if let Some(s) = g.seed {
        cfg.master_seed = s;
    }
    apply_index_base(g, &mut cfg.topology);
    if !dynamic && !cfg.schedule.is_empty() {
        return Err(CliError::Usage("config has a removal schedule; use the dynamic subcommand".into()));
    }
    let topo = harness::load_topology(&cfg)?;
    let series = harness::run_experiment(&cfg, &topo, g.jobs())?;
    if !series.header.degenerate_epochs.is_empty() {
        eprintln!("warning: λ₂ is repeated in epochs {:?}; CS uses the whole eigenspace", series.header.degenerate_epochs);
    }
    if series.header.relocation_fallbacks > 0 {
        eprintln!(
            "warning: {} runs lost a whole group to a removal and were placed uniformly",
            series.header.relocation_fallbacks
        );
    }
    let mut w = g.writer()?;
    series.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct OdeConfig {
    #[serde(flatten)]
    topology: TopologySpec,
    kappa: f64,
    #[serde(rename = "T")]
    horizon: f64,
    /// Initial densities; both drawn uniformly from the simplex when absent.
    #[serde(default)]
    x0: Option<Vec<f64>>,
    #[serde(default)]
    y0: Option<Vec<f64>>,
    #[serde(default)]
    master_seed: u64,
    #[serde(default)]
    policy: DtPolicy,
    #[serde(default = "one")]
    record_every: usize,
}

fn one() -> usize {
    1
}

pub fn ode(g: &GlobalOpts) -> CliResult<()> {
    let path = g.config()?;
    let mut cfg: OdeConfig = read_json(path)?;
    cfg.topology.resolve_paths(config_dir(path));
    apply_index_base(g, &mut cfg.topology);
    if cfg.record_every == 0 {
        return Err(CliError::Usage("record_every must be at least 1".into()));
    }
    let topo = cfg.topology.load()?;
    let n = topo.kernel.size();
    let mut rng = run_stream(g.seed.unwrap_or(cfg.master_seed), 0);
    let x0 = cfg.x0.unwrap_or_else(|| simplex_point(&mut rng, n));
    let y0 = cfg.y0.unwrap_or_else(|| simplex_point(&mut rng, n));
    let mut opts = IntegrateOptions::new(cfg.horizon);
    opts.policy = cfg.policy;
    opts.record_every = cfg.record_every;
    let rows = harness::ode_series(&x0, &y0, &topo.kernel, cfg.kappa, &opts)?;
    let mut w = g.writer()?;
    writeln!(w, "t,rq,cs,v,lambda")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.t, r.rq, r.cs, r.v, r.lambda)?;
    }
    w.flush()?;
    Ok(())
}

pub fn spectral(g: &GlobalOpts, partition: bool) -> CliResult<()> {
    let path = g.config()?;
    let mut spec: TopologySpec = read_json(path)?;
    spec.resolve_paths(config_dir(path));
    apply_index_base(g, &mut spec);
    let topo = spec.load()?;
    let result = spectral::kernel_spectrum(&topo.kernel)?;
    let eigenvalues = result.eigenvalues.clone();
    let pair = spectral::fiedler_from_spectrum(result)?;
    let names = node_names(&topo, spec.index_base);

    let mut w = g.writer()?;
    let joined: Vec<String> = eigenvalues.iter().map(f64::to_string).collect();
    writeln!(w, "# eigenvalues {}", joined.join(" "))?;
    writeln!(w, "# lambda2 {}", pair.value)?;
    if pair.degenerate {
        eprintln!("warning: λ₂ is repeated; v2 is one member of its eigenspace");
        writeln!(w, "# warning repeated lambda2, v2 is not unique")?;
    }
    let sides = if partition {
        let (s, _) = spectral::sign_partition(&pair.vector)?;
        if let Some(gr) = &topo.graph {
            writeln!(w, "# cut {}", graph::cut_value(gr, &s)?)?;
            writeln!(w, "# rcut {}", graph::rcut_value(gr, &s)?)?;
        }
        Some(s)
    } else {
        None
    };
    writeln!(w, "{}", if partition { "node,v2,side" } else { "node,v2" })?;
    for (i, v) in pair.vector.iter().enumerate() {
        match &sides {
            Some(s) => writeln!(w, "{},{},{}", names[i], v, side(s, i))?,
            None => writeln!(w, "{},{}", names[i], v)?,
        }
    }
    w.flush()?;
    Ok(())
}

fn side(s: &NodeSet, i: usize) -> u8 {
    if s.contains(i) {
        1
    } else {
        0
    }
}

pub fn compare(g: &GlobalOpts) -> CliResult<()> {
    let mut cfg = CompareConfig::from_path(g.config()?)?;
    if let Some(s) = g.seed {
        cfg.master_seed = s;
    }
    apply_index_base(g, &mut cfg.topology);
    let topo = cfg.topology.load()?;
    let report = harness::compare_sim_vs_ode(&cfg, &topo.kernel, g.jobs())?;
    let mut w = g.writer()?;
    report.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct BoundConfig {
    #[serde(flatten)]
    topology: TopologySpec,
    /// Number of states; taken from the topology when absent.
    #[serde(default)]
    nodes: Option<usize>,
    /// Lipschitz constant; estimated from the topology when absent.
    #[serde(default)]
    m: Option<f64>,
    kappa: f64,
    #[serde(rename = "T")]
    horizon: f64,
    epsilon: f64,
    ns: Vec<u64>,
    #[serde(default = "default_samples")]
    lipschitz_samples: usize,
    #[serde(default)]
    master_seed: u64,
}

fn default_samples() -> usize {
    200
}

pub fn bound(g: &GlobalOpts) -> CliResult<()> {
    let path = g.config()?;
    let mut cfg: BoundConfig = read_json(path)?;
    cfg.topology.resolve_paths(config_dir(path));
    apply_index_base(g, &mut cfg.topology);
    let has_topology = cfg.topology.graph_path.is_some() || cfg.topology.dtmc_path.is_some();
    let (nodes, m) = match (cfg.nodes, cfg.m) {
        (Some(nodes), Some(m)) if !has_topology => (nodes, m),
        _ if !has_topology => {
            return Err(CliError::Usage("give both nodes and m, or a graph or transition matrix".into()));
        }
        (nodes, m) => {
            let topo = cfg.topology.load()?;
            let size = topo.kernel.size();
            if nodes.is_some_and(|n| n != size) {
                return Err(CliError::Usage(format!("nodes disagrees with the topology size {size}")));
            }
            let m = match m {
                Some(m) => m,
                None => {
                    let mut rng = run_stream(g.seed.unwrap_or(cfg.master_seed), u64::MAX);
                    ode::estimate_lipschitz_m(&topo.kernel, cfg.kappa, cfg.lipschitz_samples, &mut rng)?.m
                }
            };
            (size, m)
        }
    };
    let mut w = g.writer()?;
    writeln!(w, "# lipschitz_m {m}")?;
    writeln!(w, "n,bound_raw,bound")?;
    for &n in &cfg.ns {
        let b = deviation_bound(&DeviationBoundInputs {
            n,
            kappa: cfg.kappa,
            nodes,
            horizon: cfg.horizon,
            epsilon: cfg.epsilon,
            m,
        })?;
        writeln!(w, "{n},{},{}", b.raw, b.probability)?;
    }
    w.flush()?;
    Ok(())
}
