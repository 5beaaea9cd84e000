//! Fluid-limit ODE of the walker densities and its analysis.
//!
//! The flow on `S = {1ᵀx = 1ᵀy = 1}` is
//!
//! ```text
//! dx/dt = Qᵀx + Λ x - κ D_y x
//! dy/dt = Qᵀy + Λ y - κ D_x y,      Λ = κ xᵀy
//! ```
//!
//! and the difference `z = x - y` obeys `dz/dt = Qᵀz + Λ z`, so the
//! direction of `z` evolves independently of `κ`.

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg;

mod bound;
mod lyapunov;
mod stability;

pub use bound::{deviation_bound, h, sup_deviation, DeviationBound, DeviationBoundInputs};
pub use lyapunov::{dv_dt_analytic, lyapunov_v, LyapunovProbe};
pub use stability::{
    estimate_lipschitz_m, jacobian, s0_instability_check, InstabilityReport, LipschitzEstimate,
};

/// Smallest `‖x - y‖` accepted before a trajectory is declared stuck in `S₀`.
pub const S0_TOL: f64 = 1e-13;

/// `Λ = κ xᵀy`.
pub fn lambda_t(x: &[f64], y: &[f64], kappa: f64) -> f64 {
    kappa * linalg::dot(x, y)
}

/// Sparse `Qᵀ` and `κ`, evaluated many times along a trajectory.
#[derive(Debug, Clone)]
pub struct Flow {
    /// `cols[i]` lists `(j, Q_ji)` with `Q_ji != 0`, so `(Qᵀv)_i = Σ Q_ji v_j`.
    cols: Vec<Vec<(usize, f64)>>,
    kappa: f64,
}

impl Flow {
    pub fn new(k: &Kernel, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be finite and nonnegative, got {kappa}")));
        }
        let q = k.rates();
        let n = k.size();
        let cols = (0..n)
            .map(|i| (0..n).filter(|&j| q[[j, i]] != 0.0).map(|j| (j, q[[j, i]])).collect())
            .collect();
        Ok(Self { cols, kappa })
    }

    pub fn size(&self) -> usize {
        self.cols.len()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `out = Qᵀ v`.
    pub fn apply_qt(&self, v: &[f64], out: &mut [f64]) {
        for (o, col) in out.iter_mut().zip(&self.cols) {
            *o = col.iter().map(|&(j, q)| q * v[j]).sum();
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64], fx: &mut [f64], fy: &mut [f64]) {
        let lambda = lambda_t(x, y, self.kappa);
        self.apply_qt(x, fx);
        self.apply_qt(y, fy);
        for i in 0..x.len() {
            fx[i] += lambda * x[i] - self.kappa * y[i] * x[i];
            fy[i] += lambda * y[i] - self.kappa * x[i] * y[i];
        }
    }
}

/// `(F_x, F_y)` at `(x, y)`.
pub fn vector_field(x: &[f64], y: &[f64], k: &Kernel, kappa: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != k.size() || y.len() != k.size() {
        return Err(Error::Domain("state dimension does not match the kernel".into()));
    }
    let flow = Flow::new(k, kappa)?;
    let mut fx = vec![0.0; x.len()];
    let mut fy = vec![0.0; x.len()];
    flow.eval(x, y, &mut fx, &mut fy);
    Ok((fx, fy))
}

/// Step-size rule `dt = min(dt_max, safety / (2 max_j q_j + 2κ))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DtPolicy {
    pub dt_max: f64,
    pub safety: f64,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self { dt_max: 0.01, safety: 0.1 }
    }
}

impl DtPolicy {
    pub fn step(&self, k: &Kernel, kappa: f64) -> f64 {
        let cap = self.safety / (2.0 * k.max_exit_rate() + 2.0 * kappa);
        self.dt_max.min(cap)
    }
}

/// Recorded ODE path.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<Vec<f64>>,
    pub dt: f64,
    pub steps: usize,
    /// Largest `|1ᵀx - 1|` seen before renormalizing a step.
    pub max_mass_drift: f64,
}

impl OdeTrajectory {
    pub fn final_state(&self) -> (&[f64], &[f64]) {
        (self.xs.last().unwrap(), self.ys.last().unwrap())
    }

    pub fn z(&self, i: usize) -> Vec<f64> {
        self.xs[i].iter().zip(&self.ys[i]).map(|(a, b)| a - b).collect()
    }

    pub fn final_z(&self) -> Vec<f64> {
        self.z(self.times.len() - 1)
    }

    /// State at `t`, linearly interpolated between recorded points.
    pub fn state_at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let last = *self.times.last().unwrap();
        if !(t >= 0.0 && t <= last) {
            return Err(Error::Domain(format!("time {t} outside [0, {last}]")));
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return Ok((self.xs[0].clone(), self.ys[0].clone()));
        }
        let i = k - 1;
        if i + 1 == self.times.len() || self.times[i] == t {
            return Ok((self.xs[i].clone(), self.ys[i].clone()));
        }
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        let lerp = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p + w * (q - p)).collect();
        Ok((lerp(&self.xs[i], &self.xs[i + 1]), lerp(&self.ys[i], &self.ys[i + 1])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub horizon: f64,
    pub policy: DtPolicy,
    /// Store every `record_every`-th state (the last one is always stored).
    pub record_every: usize,
}

impl IntegrateOptions {
    pub fn new(horizon: f64) -> Self {
        Self { horizon, policy: DtPolicy::default(), record_every: 1 }
    }
}

/// Callback receiving `(t, x, y)` after every step.
pub type Observer<'a> = &'a mut dyn FnMut(f64, &[f64], &[f64]);

/// Fixed-step RK4 integration of the flow from `(x0, y0)`.
///
/// `dt` from the policy is shrunk so an integer number of steps lands on the
/// horizon. Each step renormalizes `x` and `y` to unit mass. `observer`, if
/// given, sees every state including the initial one.
pub fn integrate(
    x0: &[f64],
    y0: &[f64],
    k: &Kernel,
    kappa: f64,
    opts: &IntegrateOptions,
    mut observer: Option<Observer<'_>>,
) -> Result<OdeTrajectory> {
    let IntegrateOptions { horizon, policy, record_every } = *opts;
    let n = k.size();
    if x0.len() != n || y0.len() != n {
        return Err(Error::Domain("initial state dimension does not match the kernel".into()));
    }
    for (name, v) in [("x0", x0), ("y0", y0)] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("{name} sums to {s}, expected 1")));
        }
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    if !(policy.dt_max > 0.0 && policy.safety > 0.0) {
        return Err(Error::Domain("step policy needs positive dt_max and safety".into()));
    }
    let flow = Flow::new(k, kappa)?;
    let steps = (horizon / policy.step(k, kappa)).ceil().max(1.0) as usize;
    let dt = horizon / steps as f64;
    let record_every = record_every.max(1);

    let check_s0 = |x: &[f64], y: &[f64], t: f64| -> Result<()> {
        let d = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if d < S0_TOL {
            return Err(Error::Degenerate(format!("trajectory entered S0 (x = y) at t = {t}")));
        }
        Ok(())
    };

    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    check_s0(&x, &y, 0.0)?;
    let mut out = OdeTrajectory {
        times: vec![0.0],
        xs: vec![x.clone()],
        ys: vec![y.clone()],
        dt,
        steps,
        max_mass_drift: 0.0,
    };
    if let Some(obs) = observer.as_deref_mut() {
        obs(0.0, &x, &y);
    }
    let mut k1 = (vec![0.0; n], vec![0.0; n]);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tx = vec![0.0; n];
    let mut ty = vec![0.0; n];
    for step in 1..=steps {
        flow.eval(&x, &y, &mut k1.0, &mut k1.1);
        for i in 0..n {
            tx[i] = x[i] + 0.5 * dt * k1.0[i];
            ty[i] = y[i] + 0.5 * dt * k1.1[i];
        }
        flow.eval(&tx, &ty, &mut k2.0, &mut k2.1);
        for i in 0..n {
            tx[i] = x[i] + 0.5 * dt * k2.0[i];
            ty[i] = y[i] + 0.5 * dt * k2.1[i];
        }
        flow.eval(&tx, &ty, &mut k3.0, &mut k3.1);
        for i in 0..n {
            tx[i] = x[i] + dt * k3.0[i];
            ty[i] = y[i] + dt * k3.1[i];
        }
        flow.eval(&tx, &ty, &mut k4.0, &mut k4.1);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
            y[i] += dt / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
        }
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        if !(sx.is_finite() && sy.is_finite()) {
            return Err(Error::Numeric(format!("integration diverged at step {step}")));
        }
        out.max_mass_drift = out.max_mass_drift.max((sx - 1.0).abs()).max((sy - 1.0).abs());
        x.iter_mut().for_each(|v| *v /= sx);
        y.iter_mut().for_each(|v| *v /= sy);
        let t = if step == steps { horizon } else { step as f64 * dt };
        check_s0(&x, &y, t)?;
        if let Some(obs) = observer.as_deref_mut() {
            obs(t, &x, &y);
        }
        if step % record_every == 0 || step == steps {
            out.times.push(t);
            out.xs.push(x.clone());
            out.ys.push(y.clone());
        }
    }
    Ok(out)
}

/// Embeds a direction `z ⊥ 1` as `x = u + s z/2`, `y = u - s z/2` around
/// the uniform vector `u`, scaled so every entry of `x` and `y` lies in
/// `[u/2, 3u/2]`.
pub fn embed_z(z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = z.len();
    let zmax = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let l1: f64 = z.iter().map(|v| v.abs()).sum();
    if zmax == 0.0 {
        return Err(Error::Degenerate("cannot embed the zero direction".into()));
    }
    if z.iter().sum::<f64>().abs() > 1e-10 * l1 {
        return Err(Error::Domain("direction must be orthogonal to the all-ones vector".into()));
    }
    let u = 1.0 / n as f64;
    let s = u / zmax;
    let x = z.iter().map(|v| u + 0.5 * s * v).collect();
    let y = z.iter().map(|v| u - 0.5 * s * v).collect();
    Ok((x, y))
}
