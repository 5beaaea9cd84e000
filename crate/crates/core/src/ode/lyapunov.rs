//! Lyapunov function `V(u) = ½ ⟨u, -Qᵀu⟩` of the normalized difference flow.

use super::Flow;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::spectral::{self, Geometry, SpectralResult};

/// Precomputed spectrum and `Qᵀ` for repeated evaluation along a trajectory.
#[derive(Debug, Clone)]
pub struct LyapunovProbe {
    spectrum: SpectralResult,
    qt: Flow,
}

impl LyapunovProbe {
    pub fn new(k: &Kernel) -> Result<Self> {
        Ok(Self { spectrum: spectral::kernel_spectrum(k)?, qt: Flow::new(k, 0.0)? })
    }

    pub fn spectrum(&self) -> &SpectralResult {
        &self.spectrum
    }

    pub fn geometry(&self) -> &Geometry {
        &self.spectrum.geometry
    }

    /// `½ ⟨u, -Qᵀu⟩`.
    pub fn v(&self, u: &[f64]) -> f64 {
        let mut qu = vec![0.0; u.len()];
        self.qt.apply_qt(u, &mut qu);
        -0.5 * self.geometry().inner(u, &qu)
    }

    /// `V(z / ‖z‖)`.
    pub fn v_normalized(&self, z: &[f64]) -> Result<f64> {
        let nz = self.geometry().norm(z);
        if nz == 0.0 {
            return Err(Error::Degenerate("cannot normalize a zero difference".into()));
        }
        Ok(self.v(z) / (nz * nz))
    }

    /// Time derivative of `V(z̃)` along the flow, from the spectral
    /// expansion `(Σ λ_k p_k)² - Σ λ_k² p_k` with `p_k ∝ ⟨z, v_k⟩²`, `k ≥ 2`.
    pub fn dv_dt(&self, z: &[f64]) -> Result<f64> {
        let l1: f64 = z.iter().map(|v| v.abs()).sum();
        if l1 == 0.0 {
            return Err(Error::Degenerate("zero difference vector".into()));
        }
        if z.iter().sum::<f64>().abs() > 1e-10 * l1 {
            return Err(Error::Domain("difference vector has a component along the all-ones direction".into()));
        }
        let g = self.geometry();
        let weights: Vec<(f64, f64)> = self
            .spectrum
            .eigenvalues
            .iter()
            .zip(&self.spectrum.eigenvectors)
            .skip(1)
            .map(|(&l, v)| (l, g.inner(z, v).powi(2)))
            .collect();
        let total: f64 = weights.iter().map(|w| w.1).sum();
        let mean: f64 = weights.iter().map(|&(l, c)| l * c).sum::<f64>() / total;
        let second: f64 = weights.iter().map(|&(l, c)| l * l * c).sum::<f64>() / total;
        Ok(mean * mean - second)
    }
}

/// `½ ⟨u, -Qᵀu⟩` in the kernel's geometry.
pub fn lyapunov_v(u: &[f64], k: &Kernel) -> Result<f64> {
    Ok(LyapunovProbe::new(k)?.v(u))
}

/// See [`LyapunovProbe::dv_dt`].
pub fn dv_dt_analytic(z: &[f64], k: &Kernel) -> Result<f64> {
    LyapunovProbe::new(k)?.dv_dt(z)
}
