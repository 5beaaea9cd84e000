//! Exact event-driven simulation of the two-group walker process.
//!
//! State is the pair of count vectors `(X, Y)` with `ΣX = ΣY = n`. Events
//! are drawn with the Gillespie algorithm from the total rate
//! `R = Σ_j q_j (X_j + Y_j) + 2 (κ/n) Σ_j X_j Y_j`, where `q_j = -Q_jj`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeSet;
use crate::kernel::Kernel;
use crate::rng::{self, StreamRng};

mod fenwick;
mod schedule;
mod trajectory;

use fenwick::Fenwick;
pub use schedule::{resolve_epochs, static_epochs, Epoch, Removal};
pub use trajectory::{Snapshot, Trajectory};

/// Applied events between rate-table consistency checks.
pub const RESYNC_INTERVAL: u64 = 1_000_000;
const RESYNC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WalkerType {
    X,
    Y,
}

impl WalkerType {
    pub fn as_str(self) -> &'static str {
        match self {
            WalkerType::X => "x",
            WalkerType::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// A walker follows the kernel from `from` to `to`.
    Walk,
    /// A walker at `from` is killed by an opposite pair and respawns at `to`
    /// (possibly `from` itself, which leaves the counts unchanged).
    Kill,
    /// A walker on a removed node is moved; `from` indexes the previous
    /// topology and `to` the new one.
    Relocate,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Walk => "walk",
            EventKind::Kill => "kill",
            EventKind::Relocate => "relocate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub walker: WalkerType,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Walkers per group.
    pub n: u64,
    /// Interaction strength; `0` switches kills off.
    pub kappa: f64,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("need at least one walker per group".into()));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be finite and nonnegative, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Initial walker placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Placement {
    /// Each of the `2n` walkers on an independent uniformly chosen node.
    Uniform,
    /// Given counts; each vector must sum to `n`.
    Explicit { x: Vec<u64>, y: Vec<u64> },
}

/// Resolves a placement into count vectors.
pub fn init_counts<R: Rng + ?Sized>(
    node_count: usize,
    n: u64,
    placement: &Placement,
    rng: &mut R,
) -> Result<(Vec<u64>, Vec<u64>)> {
    match placement {
        Placement::Uniform => {
            let mut x = vec![0; node_count];
            let mut y = vec![0; node_count];
            for _ in 0..n {
                x[rng.random_range(0..node_count)] += 1;
            }
            for _ in 0..n {
                y[rng.random_range(0..node_count)] += 1;
            }
            Ok((x, y))
        }
        Placement::Explicit { x, y } => {
            validate_counts(node_count, n, x, y)?;
            Ok((x.clone(), y.clone()))
        }
    }
}

fn validate_counts(node_count: usize, n: u64, x: &[u64], y: &[u64]) -> Result<()> {
    for (name, v) in [("x", x), ("y", y)] {
        if v.len() != node_count {
            return Err(Error::Domain(format!("{name} counts have {} entries for {node_count} nodes", v.len())));
        }
        let s: u64 = v.iter().sum();
        if s != n {
            return Err(Error::Domain(format!("{name} counts sum to {s}, expected {n}")));
        }
    }
    Ok(())
}

/// Explicit counts `n x` and `n y`; fails unless both scale to integers.
pub fn counts_from_densities(x: &[f64], y: &[f64], n: u64) -> Result<Placement> {
    let scale = |v: &[f64], name: &str| -> Result<Vec<u64>> {
        let counts: Vec<u64> = v.iter().map(|&p| (p * n as f64).round() as u64).collect();
        let exact = v.iter().zip(&counts).all(|(&p, &c)| (p * n as f64 - c as f64).abs() < 1e-9);
        if !exact || counts.iter().sum::<u64>() != n {
            return Err(Error::Domain(format!("{name} density is not representable with n = {n}")));
        }
        Ok(counts)
    };
    Ok(Placement::Explicit { x: scale(x, "x")?, y: scale(y, "y")? })
}

/// Mutable process state plus the incremental rate tables.
#[derive(Debug, Clone)]
pub struct Simulation {
    n: u64,
    kappa: f64,
    rows: Vec<Vec<(usize, f64)>>,
    cumulative: Vec<Vec<f64>>,
    exit: Vec<f64>,
    x: Vec<u64>,
    y: Vec<u64>,
    walk_x: Fenwick<f64>,
    walk_y: Fenwick<f64>,
    count_x: Fenwick<u64>,
    count_y: Fenwick<u64>,
    pairs: u64,
    active: Vec<usize>,
    active_pos: Vec<usize>,
    clock: f64,
    integral_x: Vec<f64>,
    integral_y: Vec<f64>,
    last_touch: Vec<f64>,
    applied: u64,
    max_drift: f64,
    rng: StreamRng,
}

impl Simulation {
    pub fn new(kernel: &Kernel, params: SimParams, x: Vec<u64>, y: Vec<u64>, rng: StreamRng) -> Result<Self> {
        params.validate()?;
        let nodes = kernel.size();
        validate_counts(nodes, params.n, &x, &y)?;
        let mut sim = Self {
            n: params.n,
            kappa: params.kappa,
            rows: Vec::new(),
            cumulative: Vec::new(),
            exit: Vec::new(),
            x,
            y,
            walk_x: Fenwick::from_values(Vec::new()),
            walk_y: Fenwick::from_values(Vec::new()),
            count_x: Fenwick::from_values(Vec::new()),
            count_y: Fenwick::from_values(Vec::new()),
            pairs: 0,
            active: Vec::new(),
            active_pos: Vec::new(),
            clock: 0.0,
            integral_x: vec![0.0; nodes],
            integral_y: vec![0.0; nodes],
            last_touch: vec![0.0; nodes],
            applied: 0,
            max_drift: 0.0,
            rng,
        };
        sim.load_kernel(kernel);
        Ok(sim)
    }

    fn load_kernel(&mut self, kernel: &Kernel) {
        self.rows = kernel.sparse_rows();
        self.cumulative = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = 0.0;
                r.iter().map(|&(_, q)| {
                    acc += q;
                    acc
                })
                .collect()
            })
            .collect();
        self.exit = self.cumulative.iter().map(|c| c.last().copied().unwrap_or(0.0)).collect();
        self.rebuild_tables();
    }

    fn rebuild_tables(&mut self) {
        let nodes = self.x.len();
        self.walk_x = Fenwick::from_values((0..nodes).map(|j| self.exit[j] * self.x[j] as f64).collect());
        self.walk_y = Fenwick::from_values((0..nodes).map(|j| self.exit[j] * self.y[j] as f64).collect());
        self.count_x = Fenwick::from_values(self.x.clone());
        self.count_y = Fenwick::from_values(self.y.clone());
        self.pairs = 0;
        self.active.clear();
        self.active_pos = vec![usize::MAX; nodes];
        for j in 0..nodes {
            let p = self.x[j] * self.y[j];
            self.pairs += p;
            if p > 0 {
                self.active_pos[j] = self.active.len();
                self.active.push(j);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn counts_x(&self) -> &[u64] {
        &self.x
    }

    pub fn counts_y(&self) -> &[u64] {
        &self.y
    }

    /// Applied events so far, including null respawns.
    pub fn events_applied(&self) -> u64 {
        self.applied
    }

    /// Largest relative discrepancy seen at rate-table resync points.
    pub fn max_rate_drift(&self) -> f64 {
        self.max_drift
    }

    /// Kill rate suffered by each group at node `j`: `(κ/n) X_j Y_j`.
    pub fn node_kill_rate(&self, j: usize) -> f64 {
        self.kappa / self.n as f64 * (self.x[j] * self.y[j]) as f64
    }

    pub fn walk_rate(&self, walker: WalkerType) -> f64 {
        match walker {
            WalkerType::X => self.walk_x.total(),
            WalkerType::Y => self.walk_y.total(),
        }
    }

    pub fn kill_rate(&self) -> f64 {
        2.0 * self.kappa / self.n as f64 * self.pairs as f64
    }

    pub fn total_rate(&self) -> f64 {
        self.walk_x.total() + self.walk_y.total() + self.kill_rate()
    }

    /// Instantaneous densities `(X/n, Y/n)`.
    pub fn densities(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as f64;
        (
            self.x.iter().map(|&c| c as f64 / n).collect(),
            self.y.iter().map(|&c| c as f64 / n).collect(),
        )
    }

    /// `∫_0^t X(s) ds` and the same for `Y`, brought up to the current clock.
    pub fn integrals(&self) -> (Vec<f64>, Vec<f64>) {
        let t = self.clock;
        let ix = (0..self.node_count())
            .map(|j| self.integral_x[j] + self.x[j] as f64 * (t - self.last_touch[j]))
            .collect();
        let iy = (0..self.node_count())
            .map(|j| self.integral_y[j] + self.y[j] as f64 * (t - self.last_touch[j]))
            .collect();
        (ix, iy)
    }

    /// Time averages `x̂ = ∫X/(n t)` and `ŷ` at the current clock.
    pub fn time_averages(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.clock <= 0.0 {
            return Err(Error::Domain("time averages need t > 0".into()));
        }
        let (ix, iy) = self.integrals();
        let (t, n) = (self.clock, self.n as f64);
        Ok((ix.iter().map(|v| v / t / n).collect(), iy.iter().map(|v| v / t / n).collect()))
    }

    /// Draws the next waiting time and event from the current state without
    /// applying it.
    pub fn draw(&mut self) -> Result<(f64, Event)> {
        let wx = self.walk_x.total();
        let wy = self.walk_y.total();
        let kill = self.kill_rate();
        let total = wx + wy + kill;
        if !(total > 0.0) {
            return Err(Error::Numeric("total event rate is zero".into()));
        }
        let dt = rng::exponential(&mut self.rng, total);
        let u = self.rng.random::<f64>() * total;
        let (kind, walker, from, to) = if u < wx + wy {
            let (walker, tree, offset) =
                if u < wx { (WalkerType::X, &self.walk_x, 0.0) } else { (WalkerType::Y, &self.walk_y, wx) };
            let from = tree.find((u - offset).max(0.0));
            let to = self.sample_destination(from);
            (EventKind::Walk, walker, from, to)
        } else {
            let from = self.sample_pair_node();
            let walker = if self.rng.random::<bool>() { WalkerType::X } else { WalkerType::Y };
            let r = self.rng.random_range(0..self.n);
            let to = match walker {
                WalkerType::X => self.count_x.find(r),
                WalkerType::Y => self.count_y.find(r),
            };
            (EventKind::Kill, walker, from, to)
        };
        Ok((dt, Event { time: self.clock + dt, kind, walker, from, to }))
    }

    fn sample_destination(&mut self, j: usize) -> usize {
        let cum = &self.cumulative[j];
        let u = self.rng.random::<f64>() * self.exit[j];
        let k = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        self.rows[j][k].0
    }

    fn sample_pair_node(&mut self) -> usize {
        let mut r = self.rng.random_range(0..self.pairs);
        for &j in &self.active {
            let p = self.x[j] * self.y[j];
            if r < p {
                return j;
            }
            r -= p;
        }
        unreachable!("pair total out of sync with active set")
    }

    fn touch(&mut self, j: usize) {
        let dt = self.clock - self.last_touch[j];
        self.integral_x[j] += self.x[j] as f64 * dt;
        self.integral_y[j] += self.y[j] as f64 * dt;
        self.last_touch[j] = self.clock;
    }

    fn set_count(&mut self, walker: WalkerType, j: usize, value: u64) {
        let old_pair = self.x[j] * self.y[j];
        match walker {
            WalkerType::X => {
                self.x[j] = value;
                self.walk_x.set(j, self.exit[j] * value as f64);
                self.count_x.set(j, value);
            }
            WalkerType::Y => {
                self.y[j] = value;
                self.walk_y.set(j, self.exit[j] * value as f64);
                self.count_y.set(j, value);
            }
        }
        let new_pair = self.x[j] * self.y[j];
        self.pairs = self.pairs - old_pair + new_pair;
        if old_pair == 0 && new_pair > 0 {
            self.active_pos[j] = self.active.len();
            self.active.push(j);
        } else if old_pair > 0 && new_pair == 0 {
            let pos = self.active_pos[j];
            self.active.swap_remove(pos);
            if let Some(&moved) = self.active.get(pos) {
                self.active_pos[moved] = pos;
            }
            self.active_pos[j] = usize::MAX;
        }
    }

    /// Advances the clock to `event.time` and moves one walker.
    pub fn apply(&mut self, event: &Event) -> Result<()> {
        if event.time < self.clock {
            return Err(Error::Domain("events must be applied in time order".into()));
        }
        self.clock = event.time;
        if event.from != event.to {
            self.touch(event.from);
            self.touch(event.to);
            let counts = match event.walker {
                WalkerType::X => &self.x,
                WalkerType::Y => &self.y,
            };
            let (a, b) = (counts[event.from], counts[event.to]);
            if a == 0 {
                return Err(Error::Domain(format!("no {} walker at node {}", event.walker.as_str(), event.from)));
            }
            self.set_count(event.walker, event.from, a - 1);
            self.set_count(event.walker, event.to, b + 1);
        }
        self.applied += 1;
        if self.applied.is_multiple_of(RESYNC_INTERVAL) {
            self.resync()?;
        }
        Ok(())
    }

    /// Compares incremental totals with a from-scratch recomputation, then
    /// rebuilds the tables. Returns the relative discrepancy.
    pub fn resync(&mut self) -> Result<f64> {
        let fresh_x: f64 = self.exit.iter().zip(&self.x).map(|(q, &c)| q * c as f64).sum();
        let fresh_y: f64 = self.exit.iter().zip(&self.y).map(|(q, &c)| q * c as f64).sum();
        let fresh_pairs: u64 = self.x.iter().zip(&self.y).map(|(a, b)| a * b).sum();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        let drift = rel(self.walk_x.total(), fresh_x).max(rel(self.walk_y.total(), fresh_y));
        self.max_drift = self.max_drift.max(drift);
        if drift > RESYNC_TOL || fresh_pairs != self.pairs {
            return Err(Error::Numeric(format!(
                "rate table drifted by {drift:e} (pairs {} vs {fresh_pairs})",
                self.pairs
            )));
        }
        self.rebuild_tables();
        Ok(drift)
    }

    /// Runs events until the next one would fire after `t_stop`, then sets
    /// the clock to `t_stop`. Memorylessness makes discarding that last
    /// draw exact.
    pub fn advance_until(&mut self, t_stop: f64, mut sink: Option<&mut Vec<Event>>) -> Result<()> {
        while self.clock < t_stop {
            let (_, event) = self.draw()?;
            if event.time > t_stop {
                self.clock = t_stop;
                break;
            }
            self.apply(&event)?;
            if let Some(s) = sink.as_deref_mut() {
                s.push(event);
            }
        }
        Ok(())
    }

    /// Deletes `removed` nodes and switches to `new_kernel` (on the
    /// surviving nodes, in order).
    ///
    /// Each walker on a removed node independently jumps to the node of a
    /// uniformly chosen surviving walker of its group; if a group has no
    /// survivors its walkers are placed uniformly and `true` is returned.
    /// Time integrals of removed nodes are discarded.
    pub fn remove_nodes(&mut self, removed: &NodeSet, new_kernel: &Kernel) -> Result<(bool, Vec<Event>)> {
        let old_nodes = self.node_count();
        if removed.members().iter().any(|&j| j >= old_nodes) || removed.len() >= old_nodes {
            return Err(Error::Domain("removal set out of range or covers every node".into()));
        }
        if new_kernel.size() != old_nodes - removed.len() {
            return Err(Error::Domain(format!(
                "new kernel has {} states, expected {}",
                new_kernel.size(),
                old_nodes - removed.len()
            )));
        }
        let (ix, iy) = self.integrals();
        let kept: Vec<usize> = (0..old_nodes).filter(|&j| !removed.contains(j)).collect();
        let mut new_index = vec![usize::MAX; old_nodes];
        for (k, &j) in kept.iter().enumerate() {
            new_index[j] = k;
        }
        let mut fallback = false;
        let mut relocations = Vec::new();
        let mut relocate = |counts: &[u64], walker: WalkerType, rng: &mut StreamRng| -> Vec<u64> {
            let survivors: Vec<u64> = kept.iter().map(|&j| counts[j]).collect();
            let mut out = survivors.clone();
            let tree = Fenwick::from_values(survivors);
            for &j in removed.members() {
                for _ in 0..counts[j] {
                    let to = if tree.total() > 0 {
                        tree.find(rng.random_range(0..tree.total()))
                    } else {
                        fallback = true;
                        rng.random_range(0..kept.len())
                    };
                    out[to] += 1;
                    relocations.push(Event { time: self.clock, kind: EventKind::Relocate, walker, from: j, to });
                }
            }
            out
        };
        let new_x = relocate(&self.x, WalkerType::X, &mut self.rng);
        let new_y = relocate(&self.y, WalkerType::Y, &mut self.rng);
        self.x = new_x;
        self.y = new_y;
        self.integral_x = kept.iter().map(|&j| ix[j]).collect();
        self.integral_y = kept.iter().map(|&j| iy[j]).collect();
        self.last_touch = vec![self.clock; kept.len()];
        self.load_kernel(new_kernel);
        Ok((fallback, relocations))
    }
}

/// Horizon, sampling grid and recording switch for [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub horizon: f64,
    /// Strictly increasing times in `(0, horizon]` at which snapshots are taken.
    pub sample_times: Vec<f64>,
    /// Keep every event (needed for replay-based statistics and export).
    pub record_events: bool,
}

fn validate_times(opts: &RunOptions, epochs: &[Epoch]) -> Result<()> {
    let t = opts.horizon;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {t}")));
    }
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
    if !increasing(&opts.sample_times) || opts.sample_times.iter().any(|&s| !(s > 0.0 && s <= t)) {
        return Err(Error::Domain("sample times must be strictly increasing within (0, T]".into()));
    }
    let starts: Vec<f64> = epochs.iter().map(|e| e.start).collect();
    if starts.first() != Some(&0.0) {
        return Err(Error::Domain("first topology epoch must start at t = 0".into()));
    }
    if !increasing(&starts) || starts.iter().skip(1).any(|&s| s > t) {
        return Err(Error::Domain("removal times must be strictly increasing within (0, T]".into()));
    }
    Ok(())
}

/// Simulates one run across the given topology epochs.
///
/// A removal scheduled at the same time as a snapshot is applied first, so
/// the snapshot belongs to the new epoch.
pub fn run(
    epochs: &[Epoch],
    params: &SimParams,
    placement: &Placement,
    opts: &RunOptions,
    mut rng: StreamRng,
) -> Result<Trajectory> {
    params.validate()?;
    validate_times(opts, epochs)?;
    let (x0, y0) = init_counts(epochs[0].kernel.size(), params.n, placement, &mut rng)?;
    let mut sim = Simulation::new(&epochs[0].kernel, *params, x0.clone(), y0.clone(), rng)?;
    let mut events = opts.record_events.then(Vec::new);
    let mut snapshots = Vec::with_capacity(opts.sample_times.len());
    let mut fallback = false;
    let (mut next_epoch, mut next_sample) = (1, 0);
    loop {
        let t_rem = epochs.get(next_epoch).map_or(f64::INFINITY, |e| e.start);
        let t_samp = opts.sample_times.get(next_sample).copied().unwrap_or(f64::INFINITY);
        let t_stop = t_rem.min(t_samp).min(opts.horizon);
        sim.advance_until(t_stop, events.as_mut())?;
        if t_rem <= t_stop {
            let epoch = &epochs[next_epoch];
            let (fb, relocations) = sim.remove_nodes(&epoch.removed, &epoch.kernel)?;
            fallback |= fb;
            if let Some(ev) = events.as_mut() {
                ev.extend(relocations);
            }
            next_epoch += 1;
        } else if t_samp <= t_stop {
            snapshots.push(Snapshot::capture(&sim, next_epoch - 1)?);
            next_sample += 1;
        } else {
            break;
        }
    }
    let (final_x_hat, final_y_hat) = sim.time_averages()?;
    Ok(Trajectory {
        n: params.n,
        kappa: params.kappa,
        horizon: opts.horizon,
        initial_x: x0,
        initial_y: y0,
        events,
        snapshots,
        final_x: sim.counts_x().to_vec(),
        final_y: sim.counts_y().to_vec(),
        final_x_hat,
        final_y_hat,
        event_count: sim.events_applied(),
        relocation_fallback: fallback,
        epoch_starts: epochs.iter().map(|e| e.start).collect(),
        max_rate_drift: sim.max_rate_drift(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::*;
    use crate::kernel::KernelKind;
    use crate::rng::run_stream;

    fn kernel(g: &crate::Graph) -> Kernel {
        KernelKind::Combinatorial.build(g).unwrap()
    }

    #[test]
    fn explicit_counts_validated() {
        let mut r = run_stream(0, 0);
        let ok = Placement::Explicit { x: vec![3, 0, 0], y: vec![0, 3, 0] };
        assert!(init_counts(3, 3, &ok, &mut r).is_ok());
        let bad = Placement::Explicit { x: vec![2, 0, 0], y: vec![0, 3, 0] };
        assert!(matches!(init_counts(3, 3, &bad, &mut r), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_placement_reproducible() {
        let a = init_counts(3, 3, &Placement::Uniform, &mut run_stream(4, 2)).unwrap();
        let b = init_counts(3, 3, &Placement::Uniform, &mut run_stream(4, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.iter().sum::<u64>(), 3);
    }

    #[test]
    fn node_kill_rate_matches_pair_count() {
        let k = kernel(&path(3));
        let sim = Simulation::new(
            &k,
            SimParams { n: 6, kappa: 7.0 },
            vec![2, 4, 0],
            vec![3, 0, 3],
            run_stream(0, 0),
        )
        .unwrap();
        assert_eq!(sim.node_kill_rate(0), 7.0);
        assert_eq!(sim.kill_rate(), 14.0);
        assert_eq!(sim.total_rate(), (2.0 + 8.0) + (3.0 + 3.0) + 14.0);
    }

    #[test]
    fn disjoint_groups_only_walk() {
        let k = kernel(&path(2));
        let mut sim =
            Simulation::new(&k, SimParams { n: 5, kappa: 3.0 }, vec![5, 0], vec![0, 5], run_stream(1, 0)).unwrap();
        assert_eq!(sim.kill_rate(), 0.0);
        let (_, e) = sim.draw().unwrap();
        assert_eq!(e.kind, EventKind::Walk);
    }

    #[test]
    fn conservation_and_integrals() {
        let g = cycle(5);
        let k = kernel(&g);
        let mut sim = Simulation::new(
            &k,
            SimParams { n: 4, kappa: 50.0 },
            vec![4, 0, 0, 0, 0],
            vec![1, 1, 1, 1, 0],
            run_stream(2, 0),
        )
        .unwrap();
        for _ in 0..5000 {
            let (_, e) = sim.draw().unwrap();
            sim.apply(&e).unwrap();
            assert_eq!(sim.counts_x().iter().sum::<u64>(), 4);
            assert_eq!(sim.counts_y().iter().sum::<u64>(), 4);
        }
        let (xh, yh) = sim.time_averages().unwrap();
        assert!((xh.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((yh.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        sim.resync().unwrap();
    }

    #[test]
    fn removal_relocates_to_survivors() {
        let g = path(3);
        let k = kernel(&g);
        let mut sim =
            Simulation::new(&k, SimParams { n: 3, kappa: 1.0 }, vec![2, 1, 0], vec![0, 0, 3], run_stream(3, 0))
                .unwrap();
        let removed = NodeSet::new(vec![1], 3).unwrap();
        let k2 = Kernel::from_rates(ndarray::array![[-1.0, 1.0], [1.0, -1.0]]).unwrap();
        let (fallback, moves) = sim.remove_nodes(&removed, &k2).unwrap();
        assert!(!fallback);
        assert_eq!(sim.counts_x(), &[3, 0]);
        assert_eq!(sim.counts_y(), &[0, 3]);
        assert_eq!(moves.len(), 1);
    }

    #[test]
    fn removal_fallback_when_group_wiped_out() {
        let k = kernel(&path(3));
        let mut sim =
            Simulation::new(&k, SimParams { n: 3, kappa: 1.0 }, vec![0, 3, 0], vec![1, 1, 1], run_stream(3, 1))
                .unwrap();
        let removed = NodeSet::new(vec![1], 3).unwrap();
        let k2 = Kernel::from_rates(ndarray::array![[-1.0, 1.0], [1.0, -1.0]]).unwrap();
        let (fallback, _) = sim.remove_nodes(&removed, &k2).unwrap();
        assert!(fallback);
        assert_eq!(sim.counts_x().iter().sum::<u64>(), 3);
        let y = sim.counts_y();
        assert_eq!(y.iter().sum::<u64>(), 3);
        assert!(y.iter().all(|&c| c >= 1));
    }
}
