//! Jacobian of the flow, instability of the diagonal `x = y`, and sampled
//! Lipschitz constants.

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{self, Matrix};
use crate::rng::simplex_point;
use crate::spectral;

const POSITIVE_TOL: f64 = 1e-9;

/// Jacobian of `(F_x, F_y)` with respect to `(x, y)`, as a `2N × 2N` matrix.
///
/// ```text
/// ∂F_x/∂x = Qᵀ + κ(xᵀy) I + κ x yᵀ - κ D_y     ∂F_x/∂y = κ x xᵀ - κ D_x
/// ∂F_y/∂x = κ y yᵀ - κ D_y                      ∂F_y/∂y = Qᵀ + κ(xᵀy) I + κ y xᵀ - κ D_x
/// ```
pub fn jacobian(x: &[f64], y: &[f64], k: &Kernel, kappa: f64) -> Result<Matrix> {
    let n = k.size();
    if x.len() != n || y.len() != n {
        return Err(Error::Domain("state dimension does not match the kernel".into()));
    }
    let q = k.rates();
    let overlap = linalg::dot(x, y);
    let mut j = Array2::zeros((2 * n, 2 * n));
    for r in 0..n {
        for c in 0..n {
            j[[r, c]] = q[[c, r]] + kappa * x[r] * y[c];
            j[[r, n + c]] = kappa * x[r] * x[c];
            j[[n + r, c]] = kappa * y[r] * y[c];
            j[[n + r, n + c]] = q[[c, r]] + kappa * y[r] * x[c];
        }
        j[[r, r]] += kappa * (overlap - y[r]);
        j[[r, n + r]] -= kappa * x[r];
        j[[n + r, r]] -= kappa * y[r];
        j[[n + r, n + r]] += kappa * (overlap - x[r]);
    }
    Ok(j)
}

/// Outcome of the linear instability analysis at a diagonal point `(x, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InstabilityReport {
    /// Ascending eigenvalues of `(J + Jᵀ)/2`.
    pub symmetrized_eigenvalues: Vec<f64>,
    /// Eigenvalues of `(J + Jᵀ)/2` above `1e-9`.
    pub positive_symmetrized: usize,
    /// Eigenvalues of `J` itself with real part above `1e-9`.
    pub positive_real_parts: usize,
    pub max_real_part: f64,
    /// Lower bound `-λ_N + κ min_i x_i²` on the `N+1` largest eigenvalues.
    pub threshold_bound: f64,
    /// The bound is a theorem only for symmetric `Q`; for other reversible
    /// kernels it is reported as an empirical indicator.
    pub bound_proven: bool,
}

/// Counts unstable directions of the flow at `(x, x)` and evaluates the
/// analytic lower bound.
pub fn s0_instability_check(x: &[f64], k: &Kernel, kappa: f64) -> Result<InstabilityReport> {
    if x.len() != k.size() {
        return Err(Error::Domain("state dimension does not match the kernel".into()));
    }
    if let Some(i) = x.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!("x[{i}] = {} is not strictly positive", x[i])));
    }
    let j = jacobian(x, x, k, kappa)?;
    let sym = (&j + &j.t()) * 0.5;
    let symmetrized_eigenvalues = spectral::jacobi_eigen(&sym)?.eigenvalues;
    let positive_symmetrized = symmetrized_eigenvalues.iter().filter(|&&l| l > POSITIVE_TOL).count();

    let dim = j.nrows();
    let dense = DMatrix::from_fn(dim, dim, |r, c| j[[r, c]]);
    let eig = dense.complex_eigenvalues();
    if eig.iter().any(|c| !c.re.is_finite()) {
        return Err(Error::Numeric("Jacobian eigenvalue computation failed".into()));
    }
    let positive_real_parts = eig.iter().filter(|c| c.re > POSITIVE_TOL).count();
    let max_real_part = eig.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);

    let lambda_max = *spectral::kernel_spectrum(k)?.eigenvalues.last().unwrap();
    let min_x = x.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold_bound = -lambda_max + kappa * min_x * min_x;
    let bound_proven = linalg::asymmetry(k.rates()) == 0.0;
    Ok(InstabilityReport {
        symmetrized_eigenvalues,
        positive_symmetrized,
        positive_real_parts,
        max_real_part,
        threshold_bound,
        bound_proven,
    })
}

/// Sampled lower estimate of the Lipschitz constant of the flow on `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    pub m: f64,
    pub samples: usize,
    /// Running maximum after each sample.
    pub running_max: Vec<f64>,
}

/// Largest spectral norm of the Jacobian over `samples` uniform points of
/// the product of simplices.
pub fn estimate_lipschitz_m<R: Rng + ?Sized>(
    k: &Kernel,
    kappa: f64,
    samples: usize,
    rng: &mut R,
) -> Result<LipschitzEstimate> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let n = k.size();
    let mut best = 0.0_f64;
    let mut running_max = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = simplex_point(rng, n);
        let y = simplex_point(rng, n);
        let j = jacobian(&x, &y, k, kappa)?;
        best = best.max(linalg::spectral_norm(&j, 2000, 1e-13));
        running_max.push(best);
    }
    Ok(LipschitzEstimate { m: best, samples, running_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::*;
    use crate::kernel::KernelKind;
    use crate::ode::vector_field;
    use crate::rng::run_stream;

    fn finite_difference(x: &[f64], y: &[f64], k: &Kernel, kappa: f64) -> Matrix {
        let n = x.len();
        let h = 1e-6;
        let mut j = Array2::zeros((2 * n, 2 * n));
        for c in 0..2 * n {
            let mut xp = x.to_vec();
            let mut yp = y.to_vec();
            let mut xm = x.to_vec();
            let mut ym = y.to_vec();
            if c < n {
                xp[c] += h;
                xm[c] -= h;
            } else {
                yp[c - n] += h;
                ym[c - n] -= h;
            }
            let (fxp, fyp) = vector_field(&xp, &yp, k, kappa).unwrap();
            let (fxm, fym) = vector_field(&xm, &ym, k, kappa).unwrap();
            for r in 0..n {
                j[[r, c]] = (fxp[r] - fxm[r]) / (2.0 * h);
                j[[n + r, c]] = (fyp[r] - fym[r]) / (2.0 * h);
            }
        }
        j
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = run_stream(12, 0);
        let g = gnm_connected(6, 9, &mut rng).unwrap();
        for kind in [KernelKind::Combinatorial, KernelKind::RandomWalk] {
            let k = kind.build(&g).unwrap();
            for _ in 0..10 {
                let x = simplex_point(&mut rng, 6);
                let y = simplex_point(&mut rng, 6);
                let a = jacobian(&x, &y, &k, 5.0).unwrap();
                let b = finite_difference(&x, &y, &k, 5.0);
                let scale = linalg::frobenius(&a);
                let diff = (&a - &b).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                assert!(diff <= 1e-5 * scale.max(1.0), "diff {diff}");
            }
        }
    }

    #[test]
    fn zero_kappa_is_block_diagonal() {
        let k = KernelKind::RandomWalk.build(&star(3)).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        let j = jacobian(&x, &x, &k, 0.0).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(j[[r, c]], k.rates()[[c, r]]);
                assert_eq!(j[[r, 4 + c]], 0.0);
                assert_eq!(j[[4 + r, c]], 0.0);
            }
        }
    }

    #[test]
    fn complete_graph_large_kappa_is_unstable() {
        let k = KernelKind::Combinatorial.build(&complete(4)).unwrap();
        let r = s0_instability_check(&[0.25; 4], &k, 1000.0).unwrap();
        assert!(r.positive_symmetrized >= 5);
        assert!(r.positive_real_parts >= 5);
        assert!(r.threshold_bound > 0.0);
        assert!(r.bound_proven);
        let small = s0_instability_check(&[0.25; 4], &k, 0.1).unwrap();
        assert!(small.threshold_bound < 0.0);
        assert!(s0_instability_check(&[0.5, 0.5, 0.0, 0.0], &k, 1.0).is_err());
    }

    #[test]
    fn lipschitz_without_interaction_is_operator_norm() {
        let k = KernelKind::Combinatorial.build(&path(4)).unwrap();
        let lambda_max = *spectral::kernel_spectrum(&k).unwrap().eigenvalues.last().unwrap();
        let est = estimate_lipschitz_m(&k, 0.0, 5, &mut run_stream(1, 1)).unwrap();
        assert!((est.m - lambda_max).abs() <= 0.05 * lambda_max);
        assert!(est.running_max.windows(2).all(|w| w[0] <= w[1]));
    }
}
