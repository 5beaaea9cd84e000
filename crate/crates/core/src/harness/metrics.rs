//! Multi-run experiments and the per-time RQ/CS series they produce.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schedule::build_dynamic_schedule;
use super::{ExperimentConfig, Topology};
use crate::error::{Error, Result};
use crate::ode::{self, lambda_t, IntegrateOptions, LyapunovProbe};
use crate::rng::run_stream;
use crate::simulator::{self, static_epochs, Epoch, Placement, Removal, RunOptions, SimParams, Trajectory};
use crate::spectral::{self, FiedlerPair};
use crate::Kernel;

/// Stream index reserved for drawing random removal sets.
const SCHEDULE_STREAM: u64 = u64::MAX;

/// Everything needed to interpret a series besides the rows themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesHeader {
    pub config: ExperimentConfig,
    /// Removals actually applied, in the graph's labels.
    pub removals: Vec<Removal>,
    pub epoch_lambda2: Vec<f64>,
    /// Epochs whose `λ₂` is repeated.
    pub degenerate_epochs: Vec<usize>,
    pub removed_fraction: f64,
    /// Runs in which some removal wiped out a whole group and relocation
    /// fell back to uniform placement.
    pub relocation_fallbacks: usize,
}

/// Per-run metrics at one time plus their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rq_mean: f64,
    pub cs_mean: f64,
    pub rq: Vec<f64>,
    pub cs: Vec<f64>,
}

impl RunMetrics {
    fn from_values(rq: Vec<f64>, cs: Vec<f64>) -> Self {
        Self { rq_mean: finite_mean(&rq), cs_mean: finite_mean(&cs), rq, cs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub t: f64,
    pub epoch: usize,
    pub lambda2: f64,
    /// Metrics of the time-averaged estimator `ẑ`.
    pub estimator: RunMetrics,
    /// Metrics of the instantaneous `(X - Y)/n`, when requested.
    pub instantaneous: Option<RunMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub header: SeriesHeader,
    pub rows: Vec<MetricRow>,
}

/// Mean over the finite entries; NaN when there are none.
fn finite_mean(v: &[f64]) -> f64 {
    let (s, c) = v.iter().filter(|x| x.is_finite()).fold((0.0, 0usize), |(s, c), &x| (s + x, c + 1));
    if c == 0 {
        f64::NAN
    } else {
        s / c as f64
    }
}

/// RQ and CS of `z`; a zero `z` yields NaN for both.
fn rq_cs(z: &[f64], k: &Kernel, pair: &FiedlerPair) -> Result<(f64, f64)> {
    match (spectral::rayleigh_quotient(z, k), pair.cosine(z)) {
        (Ok(r), Ok(c)) => Ok((r, c)),
        (Err(Error::Degenerate(_)), _) | (_, Err(Error::Degenerate(_))) => Ok((f64::NAN, f64::NAN)),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Epochs of the experiment plus the resolved removals and removed fraction.
pub fn experiment_epochs(cfg: &ExperimentConfig, topo: &Topology) -> Result<(Vec<Epoch>, Vec<Removal>, f64)> {
    if cfg.schedule.is_empty() {
        return Ok((static_epochs(topo.kernel.clone(), topo.graph.clone()), Vec::new(), 0.0));
    }
    let (Some(g), Some(kind)) = (&topo.graph, topo.kind) else {
        return Err(Error::Config("node removal needs a graph-derived kernel".into()));
    };
    let mut rng = run_stream(cfg.master_seed, SCHEDULE_STREAM);
    let s = build_dynamic_schedule(g, kind, &cfg.schedule, cfg.horizon, &mut rng)?;
    Ok((s.epochs, s.removals, s.removed_fraction))
}

/// Runs `cfg.runs` independent simulations on `jobs` threads, returned in
/// run order. Run `r` uses stream `r` of the master seed, so results do not
/// depend on `jobs`.
pub fn run_trajectories(cfg: &ExperimentConfig, epochs: &[Epoch], jobs: usize) -> Result<Vec<Trajectory>> {
    cfg.validate_run()?;
    let params = SimParams { n: cfg.n, kappa: cfg.kappa };
    let opts = RunOptions {
        horizon: cfg.horizon,
        sample_times: cfg.sample_times.resolve(cfg.horizon)?,
        record_events: false,
    };
    thread_pool(jobs)?.install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|r| simulator::run(epochs, &params, &Placement::Uniform, &opts, run_stream(cfg.master_seed, r as u64)))
            .collect()
    })
}

/// Simulates every run and reduces them to the RQ/CS series.
pub fn run_experiment(cfg: &ExperimentConfig, topo: &Topology, jobs: usize) -> Result<MetricSeries> {
    let (epochs, removals, removed_fraction) = experiment_epochs(cfg, topo)?;
    let trajectories = run_trajectories(cfg, &epochs, jobs)?;
    summarize(cfg, &epochs, removals, removed_fraction, &trajectories)
}

/// Reduces finished runs to a series; all runs must share `epochs`.
pub fn summarize(
    cfg: &ExperimentConfig,
    epochs: &[Epoch],
    removals: Vec<Removal>,
    removed_fraction: f64,
    trajectories: &[Trajectory],
) -> Result<MetricSeries> {
    let pairs: Vec<FiedlerPair> = epochs.iter().map(|e| spectral::fiedler(&e.kernel)).collect::<Result<_>>()?;
    let times = cfg.sample_times.resolve(cfg.horizon)?;
    if trajectories.iter().any(|tr| tr.snapshots.len() != times.len()) {
        return Err(Error::Domain("every run must carry one snapshot per sample time".into()));
    }
    let per_run: Vec<Vec<((f64, f64), Option<(f64, f64)>)>> = trajectories
        .par_iter()
        .map(|tr| {
            tr.snapshots
                .iter()
                .map(|s| {
                    let k = &epochs[s.epoch].kernel;
                    let pair = &pairs[s.epoch];
                    let est = rq_cs(&s.z_hat(), k, pair)?;
                    let inst = if cfg.instantaneous {
                        let (x, y) = s.densities(tr.n);
                        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                        Some(rq_cs(&z, k, pair)?)
                    } else {
                        None
                    };
                    Ok((est, inst))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let epoch = trajectories.first().map_or(0, |tr| tr.snapshots[i].epoch);
        let est = RunMetrics::from_values(
            per_run.iter().map(|r| r[i].0 .0).collect(),
            per_run.iter().map(|r| r[i].0 .1).collect(),
        );
        let instantaneous = cfg.instantaneous.then(|| {
            RunMetrics::from_values(
                per_run.iter().map(|r| r[i].1.unwrap().0).collect(),
                per_run.iter().map(|r| r[i].1.unwrap().1).collect(),
            )
        });
        rows.push(MetricRow { t, epoch, lambda2: pairs[epoch].value, estimator: est, instantaneous });
    }
    let header = SeriesHeader {
        config: cfg.clone(),
        removals,
        epoch_lambda2: pairs.iter().map(|p| p.value).collect(),
        degenerate_epochs: pairs.iter().enumerate().filter(|(_, p)| p.degenerate).map(|(i, _)| i).collect(),
        removed_fraction,
        relocation_fallbacks: trajectories.iter().filter(|t| t.relocation_fallback).count(),
    };
    Ok(MetricSeries { header, rows })
}

const HEADER_PREFIX: &str = "# header ";

impl MetricSeries {
    pub fn runs(&self) -> usize {
        self.header.config.runs
    }

    /// Writes `#` comment lines (header JSON, warnings) followed by a CSV
    /// table. Floats use the shortest representation that parses back
    /// exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# fiedler-walk metric series")?;
        writeln!(w, "{HEADER_PREFIX}{}", serde_json::to_string(&self.header)?)?;
        for &e in &self.header.degenerate_epochs {
            writeln!(
                w,
                "# warning: lambda2 of epoch {e} is repeated; cosine similarity uses the eigenspace projection"
            )?;
        }
        if self.header.relocation_fallbacks > 0 {
            writeln!(w, "# warning: {} runs used uniform relocation after a removal", self.header.relocation_fallbacks)?;
        }
        let runs = self.runs();
        let inst = self.header.config.instantaneous;
        let mut cols = vec!["t".to_string(), "epoch".into(), "lambda2".into(), "rq_mean".into(), "cs_mean".into()];
        if inst {
            cols.push("inst_rq_mean".into());
            cols.push("inst_cs_mean".into());
        }
        let prefixes: &[&str] = if inst { &["rq", "cs", "inst_rq", "inst_cs"] } else { &["rq", "cs"] };
        for p in prefixes {
            cols.extend((0..runs).map(|r| format!("{p}_{r}")));
        }
        writeln!(w, "{}", cols.join(","))?;
        for row in &self.rows {
            let mut f: Vec<String> = vec![
                row.t.to_string(),
                row.epoch.to_string(),
                row.lambda2.to_string(),
                row.estimator.rq_mean.to_string(),
                row.estimator.cs_mean.to_string(),
            ];
            let values = |m: &RunMetrics, f: &mut Vec<String>| {
                f.extend(m.rq.iter().map(f64::to_string));
                f.extend(m.cs.iter().map(f64::to_string));
            };
            match &row.instantaneous {
                Some(m) => {
                    f.push(m.rq_mean.to_string());
                    f.push(m.cs_mean.to_string());
                    values(&row.estimator, &mut f);
                    values(m, &mut f);
                }
                None => values(&row.estimator, &mut f),
            }
            writeln!(w, "{}", f.join(","))?;
        }
        Ok(())
    }

    /// Parses the output of [`MetricSeries::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut header: Option<SeriesHeader> = None;
        let mut columns: Option<usize> = None;
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let parse_err = |message: String| Error::Parse { line: lineno, message };
            if let Some(json) = line.strip_prefix(HEADER_PREFIX) {
                header = Some(serde_json::from_str(json).map_err(|e| parse_err(e.to_string()))?);
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let h = header.as_ref().ok_or_else(|| parse_err("table before header line".into()))?;
            let runs = h.config.runs;
            let inst = h.config.instantaneous;
            let expected = if inst { 7 + 4 * runs } else { 5 + 2 * runs };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != expected {
                return Err(parse_err(format!("expected {expected} fields, found {}", fields.len())));
            }
            if columns.is_none() {
                if fields[0] != "t" {
                    return Err(parse_err("missing column header".into()));
                }
                columns = Some(expected);
                continue;
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(format!("{s:?}: {e}")));
            let epoch = fields[1].parse::<usize>().map_err(|e| parse_err(e.to_string()))?;
            let block = |start: usize| -> Result<Vec<f64>> { fields[start..start + runs].iter().map(|s| num(s)).collect() };
            let off = if inst { 7 } else { 5 };
            let estimator = RunMetrics { rq_mean: num(fields[3])?, cs_mean: num(fields[4])?, rq: block(off)?, cs: block(off + runs)? };
            let instantaneous = if inst {
                Some(RunMetrics {
                    rq_mean: num(fields[5])?,
                    cs_mean: num(fields[6])?,
                    rq: block(off + 2 * runs)?,
                    cs: block(off + 3 * runs)?,
                })
            } else {
                None
            };
            rows.push(MetricRow { t: num(fields[0])?, epoch, lambda2: num(fields[2])?, estimator, instantaneous });
        }
        let header = header.ok_or_else(|| Error::Parse { line: 0, message: "no header line".into() })?;
        Ok(Self { header, rows })
    }
}

/// One recorded state of an ODE path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeRow {
    pub t: f64,
    /// Rayleigh quotient of `z = x - y`.
    pub rq: f64,
    /// Cosine similarity of `z` with the `λ₂` eigenspace.
    pub cs: f64,
    /// `V(z / ‖z‖)`.
    pub v: f64,
    /// `κ xᵀy`.
    pub lambda: f64,
}

/// Integrates the flow and evaluates RQ, CS, `V` and `κ xᵀy` at every
/// recorded state.
pub fn ode_series(x0: &[f64], y0: &[f64], k: &Kernel, kappa: f64, opts: &IntegrateOptions) -> Result<Vec<OdeRow>> {
    let traj = ode::integrate(x0, y0, k, kappa, opts, None)?;
    let probe = LyapunovProbe::new(k)?;
    let pair = spectral::fiedler_from_spectrum(probe.spectrum().clone())?;
    traj.times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let z = traj.z(i);
            Ok(OdeRow {
                t,
                rq: spectral::rayleigh_quotient(&z, k)?,
                cs: pair.cosine(&z)?,
                v: probe.v_normalized(&z)?,
                lambda: lambda_t(&traj.xs[i], &traj.ys[i], kappa),
            })
        })
        .collect()
}
