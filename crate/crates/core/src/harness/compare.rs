//! Sweep over `n` comparing simulated densities with the ODE path.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_config, TopologySpec};
use crate::error::{Error, Result};
use crate::ode::{self, deviation_bound, sup_deviation, DeviationBound, DeviationBoundInputs, DtPolicy, IntegrateOptions};
use crate::rng::run_stream;
use crate::simulator::{self, counts_from_densities, static_epochs, RunOptions, SimParams};
use crate::Kernel;

fn default_lipschitz_samples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    #[serde(flatten)]
    pub topology: TopologySpec,
    /// Initial densities; `n x0` and `n y0` must be integral for every `n`.
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub kappa: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub ns: Vec<u64>,
    /// Independent runs per `n`.
    pub seeds: usize,
    pub master_seed: u64,
    /// Spacing of the grid on which the supremum is taken.
    pub grid_step: f64,
    /// Deviation level the bound refers to.
    pub epsilon: f64,
    #[serde(default = "default_lipschitz_samples")]
    pub lipschitz_samples: usize,
    #[serde(default)]
    pub policy: DtPolicy,
}

impl CompareConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let (mut cfg, base): (Self, _) = read_config(path)?;
        cfg.topology.resolve_paths(&base);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(Error::Config("ns must be a nonempty list of positive sizes".into()));
        }
        if self.seeds == 0 || self.lipschitz_samples == 0 {
            return Err(Error::Config("seeds and lipschitz_samples must be positive".into()));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.horizon) || !positive(self.grid_step) || !positive(self.epsilon) {
            return Err(Error::Config("T, grid_step and epsilon must be positive".into()));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be finite and nonnegative, got {}", self.kappa)));
        }
        Ok(())
    }

    /// `0, step, 2 step, ...` up to and including `T`.
    pub fn grid(&self) -> Vec<f64> {
        let count = (self.horizon / self.grid_step * (1.0 + 1e-12)).floor() as usize;
        let mut g: Vec<f64> = (0..=count).map(|k| (k as f64 * self.grid_step).min(self.horizon)).collect();
        if *g.last().unwrap() < self.horizon {
            g.push(self.horizon);
        }
        g.dedup();
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub n: u64,
    /// Per-seed supremum distance.
    pub deviations: Vec<f64>,
    pub median: f64,
    /// Fraction of seeds whose deviation reached `epsilon`.
    pub exceed_fraction: f64,
    pub bound: DeviationBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// Sampled Lipschitz constant used in the bound.
    pub m: f64,
    pub ode_dt: f64,
    pub rows: Vec<DeviationRow>,
}

/// Median of a nonempty sample; the mean of the middle pair for even sizes.
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// For each `n`, simulates `seeds` runs from `(x0, y0)` and records the
/// largest grid distance to the ODE path, next to the concentration bound.
pub fn compare_sim_vs_ode(cfg: &CompareConfig, k: &Kernel, jobs: usize) -> Result<DeviationReport> {
    cfg.validate()?;
    let grid = cfg.grid();
    let mut opts = IntegrateOptions::new(cfg.horizon);
    opts.policy = cfg.policy;
    let path = ode::integrate(&cfg.x0, &cfg.y0, k, cfg.kappa, &opts, None)?;
    let lip = ode::estimate_lipschitz_m(k, cfg.kappa, cfg.lipschitz_samples, &mut run_stream(cfg.master_seed, u64::MAX))?;
    let epochs = static_epochs(k.clone(), None);
    let run_opts = RunOptions { horizon: cfg.horizon, sample_times: grid[1..].to_vec(), record_events: false };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let mut rows = Vec::with_capacity(cfg.ns.len());
    for (ni, &n) in cfg.ns.iter().enumerate() {
        let placement = counts_from_densities(&cfg.x0, &cfg.y0, n)?;
        let params = SimParams { n, kappa: cfg.kappa };
        let deviations: Vec<f64> = pool.install(|| {
            (0..cfg.seeds)
                .into_par_iter()
                .map(|s| {
                    let stream = (ni * cfg.seeds + s) as u64;
                    let tr = simulator::run(&epochs, &params, &placement, &run_opts, run_stream(cfg.master_seed, stream))?;
                    sup_deviation(&tr, &path, &grid)
                })
                .collect::<Result<_>>()
        })?;
        let bound = deviation_bound(&DeviationBoundInputs {
            n,
            kappa: cfg.kappa,
            nodes: k.size(),
            horizon: cfg.horizon,
            epsilon: cfg.epsilon,
            m: lip.m,
        })?;
        let exceed = deviations.iter().filter(|&&d| d >= cfg.epsilon).count() as f64 / deviations.len() as f64;
        rows.push(DeviationRow { n, median: median(&deviations), exceed_fraction: exceed, deviations, bound });
    }
    Ok(DeviationReport { m: lip.m, ode_dt: path.dt, rows })
}

impl DeviationReport {
    /// One line per `n`: `n,median,exceed_fraction,bound_raw,bound,dev_0,...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# lipschitz_m {}", self.m)?;
        writeln!(w, "# ode_dt {}", self.ode_dt)?;
        let seeds = self.rows.first().map_or(0, |r| r.deviations.len());
        let mut cols = vec!["n".to_string(), "median".into(), "exceed_fraction".into(), "bound_raw".into(), "bound".into()];
        cols.extend((0..seeds).map(|s| format!("dev_{s}")));
        writeln!(w, "{}", cols.join(","))?;
        for r in &self.rows {
            let mut f = vec![
                r.n.to_string(),
                r.median.to_string(),
                r.exceed_fraction.to_string(),
                r.bound.raw.to_string(),
                r.bound.probability.to_string(),
            ];
            f.extend(r.deviations.iter().map(f64::to_string));
            writeln!(w, "{}", f.join(","))?;
        }
        Ok(())
    }
}
