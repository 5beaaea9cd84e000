//! Concentration bound on the distance between the walker densities and the
//! ODE, and the empirical distance it controls.

use serde::{Deserialize, Serialize};

use super::OdeTrajectory;
use crate::error::{Error, Result};
use crate::simulator::Trajectory;

/// `h(x) = (1 + x) ln(1 + x) - x`.
///
/// Near zero the closed form cancels to nothing, so small arguments use the
/// series `Σ_{k≥2} (-1)^k x^k / (k (k - 1))`.
pub fn h(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut sum = 0.0;
        let mut pow = x * x;
        for k in 2..24 {
            let kf = k as f64;
            sum += pow / (kf * (kf - 1.0));
            pow *= -x;
        }
        sum
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationBoundInputs {
    /// Walkers per group.
    pub n: u64,
    pub kappa: f64,
    /// Node count `N`.
    pub nodes: usize,
    pub horizon: f64,
    pub epsilon: f64,
    /// Lipschitz constant (or an estimate of it).
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationBound {
    pub raw: f64,
    /// `raw` clamped to `[0, 1]`.
    pub probability: f64,
}

/// Upper bound on `P(sup_{t ≤ T} ‖(xⁿ, yⁿ) - (x, y)‖ ≥ ε)`:
///
/// ```text
/// 4N(N-1) exp(-n (1+κ) T h(ε e^{-MT} / (√2 N(N-1) (1+κ) T)))
/// ```
pub fn deviation_bound(inp: &DeviationBoundInputs) -> Result<DeviationBound> {
    let DeviationBoundInputs { n, kappa, nodes, horizon, epsilon, m } = *inp;
    if n == 0 || nodes < 2 {
        return Err(Error::Domain("bound needs n >= 1 and at least two nodes".into()));
    }
    let finite_nonneg = |v: f64| v >= 0.0 && v.is_finite();
    if !(horizon > 0.0 && horizon.is_finite()) || !finite_nonneg(kappa) || !finite_nonneg(epsilon) || !finite_nonneg(m) {
        return Err(Error::Domain("bound needs T > 0 and finite nonnegative kappa, epsilon, M".into()));
    }
    let pairs = (nodes * (nodes - 1)) as f64;
    let scale = (1.0 + kappa) * horizon;
    let arg = epsilon * (-m * horizon).exp() / (2f64.sqrt() * pairs * scale);
    let raw = 4.0 * pairs * (-(n as f64) * scale * h(arg)).exp();
    Ok(DeviationBound { raw, probability: raw.clamp(0.0, 1.0) })
}

/// `max_{t ∈ grid} ‖(Xⁿ(t)/n, Yⁿ(t)/n) - (x(t), y(t))‖` between a simulated
/// run and an ODE path started from the same point.
///
/// The simulated state at `t` comes from a snapshot taken at exactly `t`
/// or, failing that, from the event log; the ODE state is interpolated
/// linearly between recorded steps.
pub fn sup_deviation(sim: &Trajectory, ode: &OdeTrajectory, grid: &[f64]) -> Result<f64> {
    let t_ode = *ode.times.last().unwrap();
    if (sim.horizon - t_ode).abs() > 1e-12 * sim.horizon {
        return Err(Error::Domain(format!("horizons differ: {} vs {t_ode}", sim.horizon)));
    }
    let n = sim.n as f64;
    let density = |c: &[u64]| -> Vec<f64> { c.iter().map(|&v| v as f64 / n).collect() };
    let dist = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> f64 {
        let s: f64 = a.iter().zip(b).chain(c.iter().zip(d)).map(|(p, q)| (p - q) * (p - q)).sum();
        s.sqrt()
    };
    let start = dist(&density(&sim.initial_x), &ode.xs[0], &density(&sim.initial_y), &ode.ys[0]);
    if start > 1e-12 {
        return Err(Error::Domain(format!("initial conditions differ by {start:e}")));
    }
    let mut worst = 0.0_f64;
    for &t in grid {
        if !(t >= 0.0 && t <= sim.horizon) {
            return Err(Error::Domain(format!("grid time {t} outside [0, {}]", sim.horizon)));
        }
        let (sx, sy) = if t == 0.0 {
            (sim.initial_x.clone(), sim.initial_y.clone())
        } else if let Some(s) = sim.snapshots.iter().find(|s| s.time == t) {
            (s.x.clone(), s.y.clone())
        } else if t == sim.horizon {
            (sim.final_x.clone(), sim.final_y.clone())
        } else {
            sim.state_at(t)?
        };
        let (ox, oy) = ode.state_at(t)?;
        worst = worst.max(dist(&density(&sx), &ox, &density(&sy), &oy));
    }
    Ok(worst)
}
