//! Recorded output of a simulation run and statistics computed from it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Event, EventKind, Simulation, WalkerType};
use crate::error::{Error, Result};
use crate::spectral::Geometry;

/// State and running averages at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub epoch: usize,
    pub x_hat: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
}

impl Snapshot {
    pub(crate) fn capture(sim: &Simulation, epoch: usize) -> Result<Self> {
        let (x_hat, y_hat) = sim.time_averages()?;
        Ok(Self {
            time: sim.clock(),
            epoch,
            x_hat,
            y_hat,
            x: sim.counts_x().to_vec(),
            y: sim.counts_y().to_vec(),
        })
    }

    /// Time-averaged estimator `x̂ - ŷ`.
    pub fn z_hat(&self) -> Vec<f64> {
        self.x_hat.iter().zip(&self.y_hat).map(|(a, b)| a - b).collect()
    }

    /// Instantaneous densities `(X/n, Y/n)`.
    pub fn densities(&self, n: u64) -> (Vec<f64>, Vec<f64>) {
        let n = n as f64;
        (self.x.iter().map(|&c| c as f64 / n).collect(), self.y.iter().map(|&c| c as f64 / n).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: u64,
    pub kappa: f64,
    pub horizon: f64,
    pub initial_x: Vec<u64>,
    pub initial_y: Vec<u64>,
    /// Every applied event, when recording was requested.
    pub events: Option<Vec<Event>>,
    pub snapshots: Vec<Snapshot>,
    pub final_x: Vec<u64>,
    pub final_y: Vec<u64>,
    pub final_x_hat: Vec<f64>,
    pub final_y_hat: Vec<f64>,
    pub event_count: u64,
    /// Set when some group had no surviving walker at a removal.
    pub relocation_fallback: bool,
    pub epoch_starts: Vec<f64>,
    pub max_rate_drift: f64,
}

/// Piecewise-constant path `(segment start, X, Y)`; the last segment runs
/// to the horizon.
struct Replay<'a> {
    traj: &'a Trajectory,
    events: &'a [Event],
}

impl<'a> Replay<'a> {
    fn new(traj: &'a Trajectory) -> Result<Self> {
        let events = traj
            .events
            .as_deref()
            .ok_or_else(|| Error::Domain("run was not recorded with events".into()))?;
        if traj.epoch_starts.len() > 1 {
            return Err(Error::Domain("path replay is only available for static topologies".into()));
        }
        Ok(Self { traj, events })
    }

    /// Calls `f(t0, t1, x, y)` for each constant segment intersecting `[0, until]`.
    fn for_each_segment(&self, until: f64, mut f: impl FnMut(f64, f64, &[u64], &[u64])) {
        let mut x = self.traj.initial_x.clone();
        let mut y = self.traj.initial_y.clone();
        let mut t = 0.0;
        for e in self.events {
            if e.time > until {
                break;
            }
            if e.time > t {
                f(t, e.time, &x, &y);
                t = e.time;
            }
            let counts = match e.walker {
                WalkerType::X => &mut x,
                WalkerType::Y => &mut y,
            };
            counts[e.from] -= 1;
            counts[e.to] += 1;
        }
        if until > t {
            f(t, until, &x, &y);
        }
    }
}

fn in_neighborhood(z: &[f64], center: &[f64], radius: f64, geometry: &Geometry) -> bool {
    if radius >= 1.0 {
        return true;
    }
    let nz = geometry.norm(z);
    let nc = geometry.norm(center);
    if nz == 0.0 || nc == 0.0 {
        return false;
    }
    geometry.inner(z, center).abs() / (nz * nc) >= 1.0 - radius
}

impl Trajectory {
    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t <= self.horizon) {
            return Err(Error::Domain(format!("time {t} outside (0, {}]", self.horizon)));
        }
        Ok(())
    }

    /// Counts `(X, Y)` just after all events at or before `t` (static runs
    /// recorded with events).
    pub fn state_at(&self, t: f64) -> Result<(Vec<u64>, Vec<u64>)> {
        let replay = Replay::new(self)?;
        let mut x = self.initial_x.clone();
        let mut y = self.initial_y.clone();
        for e in replay.events.iter().take_while(|e| e.time <= t) {
            let c = if e.walker == WalkerType::X { &mut x } else { &mut y };
            c[e.from] -= 1;
            c[e.to] += 1;
        }
        Ok((x, y))
    }

    /// Estimator `ẑ(t) = x̂(t) - ŷ(t)` from exact integrals up to `t`.
    ///
    /// Uses the event log when present (static runs), otherwise requires `t`
    /// to be a snapshot time or the horizon.
    pub fn estimator_z_hat(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        if self.events.is_some() && self.epoch_starts.len() == 1 {
            let replay = Replay::new(self)?;
            let nodes = self.initial_x.len();
            let mut ix = vec![0.0; nodes];
            let mut iy = vec![0.0; nodes];
            replay.for_each_segment(t, |t0, t1, x, y| {
                let dt = t1 - t0;
                for j in 0..nodes {
                    ix[j] += x[j] as f64 * dt;
                    iy[j] += y[j] as f64 * dt;
                }
            });
            let n = self.n as f64;
            return Ok(ix.iter().zip(&iy).map(|(a, b)| a / t / n - b / t / n).collect());
        }
        if t == self.horizon {
            return Ok(self.final_x_hat.iter().zip(&self.final_y_hat).map(|(a, b)| a - b).collect());
        }
        self.snapshots
            .iter()
            .find(|s| s.time == t)
            .map(Snapshot::z_hat)
            .ok_or_else(|| Error::Domain(format!("no snapshot at t = {t} and no event log")))
    }

    /// Fraction of `[t0, t1]` during which the instantaneous `z = (X - Y)/n`
    /// has cosine similarity at least `1 - radius` with `center`.
    ///
    /// `z = 0` counts as outside unless `radius >= 1`.
    pub fn occupation_fraction(
        &self,
        center: &[f64],
        radius: f64,
        window: (f64, f64),
        geometry: &Geometry,
    ) -> Result<f64> {
        let (t0, t1) = window;
        if !(t0 >= 0.0 && t1 > t0 && t1 <= self.horizon) {
            return Err(Error::Domain(format!("window ({t0}, {t1}) outside [0, {}]", self.horizon)));
        }
        let replay = Replay::new(self)?;
        let n = self.n as f64;
        let mut inside = 0.0;
        replay.for_each_segment(t1, |a, b, x, y| {
            let (a, b) = (a.max(t0), b.min(t1));
            if b <= a {
                return;
            }
            let z: Vec<f64> = x.iter().zip(y).map(|(&p, &q)| (p as f64 - q as f64) / n).collect();
            if in_neighborhood(&z, center, radius, geometry) {
                inside += b - a;
            }
        });
        Ok(inside / (t1 - t0))
    }

    /// First time the instantaneous `z` leaves the neighborhood after having
    /// been inside it; `None` if it never enters or never leaves.
    pub fn exit_time(&self, center: &[f64], radius: f64, geometry: &Geometry) -> Result<Option<f64>> {
        let replay = Replay::new(self)?;
        let n = self.n as f64;
        let mut entered = false;
        let mut exit = None;
        replay.for_each_segment(self.horizon, |a, _, x, y| {
            if exit.is_some() {
                return;
            }
            let z: Vec<f64> = x.iter().zip(y).map(|(&p, &q)| (p as f64 - q as f64) / n).collect();
            let inside = in_neighborhood(&z, center, radius, geometry);
            if inside {
                entered = true;
            } else if entered {
                exit = Some(a);
            }
        });
        Ok(exit)
    }

    /// Writes the event log as CSV with columns `t,event_kind,type,from,to`.
    pub fn write_events_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let events = self
            .events
            .as_deref()
            .ok_or_else(|| Error::Domain("run was not recorded with events".into()))?;
        writeln!(w, "t,event_kind,type,from,to")?;
        for e in events {
            writeln!(w, "{},{},{},{},{}", e.time, e.kind.as_str(), e.walker.as_str(), e.from, e.to)?;
        }
        Ok(())
    }

    /// Number of events of the given kind in the log.
    pub fn count_kind(&self, kind: EventKind) -> usize {
        self.events.as_ref().map_or(0, |ev| ev.iter().filter(|e| e.kind == kind).count())
    }
}
