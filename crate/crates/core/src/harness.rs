//! Experiment configuration, multi-run orchestration and CSV reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, IndexBase, ParseOptions};
use crate::kernel::{Kernel, KernelKind};

mod compare;
mod metrics;
mod schedule;

pub use compare::{compare_sim_vs_ode, median, CompareConfig, DeviationReport, DeviationRow};
pub use metrics::{
    experiment_epochs, ode_series, run_experiment, run_trajectories, summarize, MetricRow, MetricSeries, OdeRow, RunMetrics,
    SeriesHeader,
};
pub use schedule::{build_dynamic_schedule, RemovalSpec, ResolvedSchedule, ScheduleEntry};

/// Where the kernel of an experiment comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelSource {
    #[default]
    Combinatorial,
    RandomWalk,
    /// Row-stochastic matrix read from `dtmc_path` (JSON array of rows).
    DtmcFile,
}

/// Sampling grid: explicit times or a uniform step up to the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleTimes {
    Grid(Vec<f64>),
    Step(f64),
}

impl SampleTimes {
    pub fn resolve(&self, horizon: f64) -> Result<Vec<f64>> {
        let times = match self {
            SampleTimes::Grid(v) => v.clone(),
            SampleTimes::Step(step) => {
                if !(*step > 0.0 && step.is_finite()) {
                    return Err(Error::Config(format!("sample step must be positive, got {step}")));
                }
                let count = (horizon / step * (1.0 + 1e-12)).floor() as usize;
                (1..=count).map(|k| (k as f64 * step).min(horizon)).collect()
            }
        };
        if times.is_empty() {
            return Err(Error::Config("no sample times".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) || times.iter().any(|&t| !(t > 0.0 && t <= horizon)) {
            return Err(Error::Config("sample times must be strictly increasing within (0, T]".into()));
        }
        Ok(times)
    }
}

/// Where an experiment's graph or kernel comes from. Flattened into the
/// experiment and comparison configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TopologySpec {
    /// Edge list; relative paths resolve against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_path: Option<PathBuf>,
    #[serde(default)]
    pub index_base: u8,
    #[serde(default)]
    pub symmetrize: bool,
    #[serde(default)]
    pub kernel_kind: KernelSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtmc_path: Option<PathBuf>,
}

impl TopologySpec {
    pub fn validate(&self) -> Result<()> {
        IndexBase::from_int(self.index_base)?;
        match self.kernel_kind {
            KernelSource::DtmcFile if self.dtmc_path.is_none() => {
                Err(Error::Config("kernel_kind dtmc_file needs dtmc_path".into()))
            }
            KernelSource::Combinatorial | KernelSource::RandomWalk if self.graph_path.is_none() => {
                Err(Error::Config("graph_path is required for graph kernels".into()))
            }
            _ => Ok(()),
        }
    }

    /// Makes relative paths absolute against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.graph_path, &mut self.dtmc_path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn load(&self) -> Result<Topology> {
        self.validate()?;
        let kind = match self.kernel_kind {
            KernelSource::Combinatorial => KernelKind::Combinatorial,
            KernelSource::RandomWalk => KernelKind::RandomWalk,
            KernelSource::DtmcFile => {
                return Ok(Topology::from_kernel(load_dtmc(self.dtmc_path.as_ref().unwrap())?));
            }
        };
        let g = load_graph(self.graph_path.as_ref().unwrap(), self.index_base, self.symmetrize)?;
        Topology::from_graph(g, kind)
    }
}

pub(crate) fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, PathBuf)> {
    let text = std::fs::read_to_string(path)?;
    let cfg = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    Ok((cfg, path.parent().unwrap_or(Path::new(".")).to_path_buf()))
}

/// A single JSON experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub topology: TopologySpec,
    pub n: u64,
    pub kappa: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub runs: usize,
    pub master_seed: u64,
    pub sample_times: SampleTimes,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<ScheduleEntry>,
    /// Also report metrics of the instantaneous `z = (X - Y)/n`.
    #[serde(default)]
    pub instantaneous: bool,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config and makes its file paths absolute relative to it.
    pub fn from_path(path: &Path) -> Result<Self> {
        let (mut cfg, base): (Self, _) = read_config(path)?;
        cfg.topology.resolve_paths(&base);
        Ok(cfg)
    }

    /// Checks the run parameters and the kernel source.
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        if self.topology.kernel_kind == KernelSource::DtmcFile && !self.schedule.is_empty() {
            return Err(Error::Config("node removal needs a graph-derived kernel".into()));
        }
        self.validate_run()
    }

    /// Checks everything except where the topology comes from.
    pub fn validate_run(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be finite and nonnegative, got {}", self.kappa)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.horizon)));
        }
        IndexBase::from_int(self.topology.index_base)?;
        self.sample_times.resolve(self.horizon)?;
        Ok(())
    }
}

/// Graph (when there is one) and kernel an experiment runs on.
#[derive(Debug, Clone)]
pub struct Topology {
    pub graph: Option<Graph>,
    pub kernel: Kernel,
    pub kind: Option<KernelKind>,
}

impl Topology {
    pub fn from_graph(g: Graph, kind: KernelKind) -> Result<Self> {
        if !graph::is_connected(&g) {
            return Err(Error::Disconnected("input graph is not connected".into()));
        }
        let kernel = kind.build(&g)?;
        Ok(Self { graph: Some(g), kernel, kind: Some(kind) })
    }

    pub fn from_kernel(kernel: Kernel) -> Self {
        Self { graph: None, kernel, kind: None }
    }
}

pub fn load_graph(path: &Path, index_base: u8, symmetrize: bool) -> Result<Graph> {
    let opts = ParseOptions { index_base: IndexBase::from_int(index_base)?, symmetrize };
    graph::read_edge_list(path, opts)
}

/// Reads a row-stochastic matrix stored as a JSON array of rows.
pub fn load_dtmc(path: &Path) -> Result<Kernel> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidKernel("transition matrix rows have unequal lengths".into()));
    }
    let p = ndarray::Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect())
        .map_err(|e| Error::InvalidKernel(e.to_string()))?;
    Kernel::from_dtmc(&p)
}

pub fn load_topology(cfg: &ExperimentConfig) -> Result<Topology> {
    cfg.validate()?;
    cfg.topology.load()
}
