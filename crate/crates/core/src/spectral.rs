//! Dense symmetric eigensolver, Fiedler pairs, Rayleigh quotient / cosine
//! similarity metrics and sign partitions.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet, MAX_DENSE_NODES};
use crate::kernel::{self, Kernel, PiInnerProduct};
use crate::linalg::{self, Matrix};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-10;
/// Gap below which `λ₂` is treated as repeated.
pub const DEGENERACY_TOL: f64 = 1e-9;
const ZERO_NORM: f64 = 1e-14;

/// Inner product an eigenbasis is orthonormal in.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Euclidean,
    Pi(PiInnerProduct),
}

impl Geometry {
    /// Euclidean for uniform `π`, weighted otherwise.
    pub fn of(k: &Kernel) -> Self {
        if k.has_uniform_stationary() {
            Geometry::Euclidean
        } else {
            Geometry::Pi(k.inner_product())
        }
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Geometry::Euclidean => linalg::dot(x, y),
            Geometry::Pi(p) => p.inner(x, y),
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).sqrt()
    }
}

/// Eigenpairs sorted by ascending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` pairs with `eigenvalues[k]`; unit norm in `geometry`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub geometry: Geometry,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Second eigenpair of `-Q` together with its multiplicity information.
#[derive(Debug, Clone, PartialEq)]
pub struct FiedlerPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `λ₃ - λ₂` (infinite for two-state chains).
    pub gap: f64,
    /// Set when `λ₂` is repeated; `vector` is then one arbitrary member of
    /// the eigenspace and comparisons should use [`FiedlerPair::eigenspace`].
    pub degenerate: bool,
    /// Orthonormal basis of the `λ₂` eigenspace (just `vector` when simple).
    pub eigenspace: Vec<Vec<f64>>,
    pub geometry: Geometry,
}

impl FiedlerPair {
    /// Cosine similarity of `z` with the `λ₂` eigenspace: the vector itself
    /// when simple, the projection of `z` onto the eigenspace otherwise.
    pub fn cosine(&self, z: &[f64]) -> Result<f64> {
        let nz = self.geometry.norm(z);
        if nz < ZERO_NORM {
            return Err(Error::Degenerate("cosine similarity of a zero vector".into()));
        }
        let proj: f64 = self.eigenspace.iter().map(|b| self.geometry.inner(z, b).powi(2)).sum();
        Ok((proj.sqrt() / nz).min(1.0))
    }
}

/// Makes the largest-magnitude entry positive; near-ties (within 1e-9
/// relative) go to the lowest index.
pub fn apply_sign_convention(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = v.iter().position(|x| x.abs() >= max - 1e-9 * max).expect("max is attained");
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi diagonalization of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-12 ‖m‖_F`,
/// then checks every residual `‖m v - λ v‖ ≤ 1e-8 ‖m‖_F`. Vectors are
/// Euclidean unit vectors with the sign convention applied.
pub fn jacobi_eigen(m: &Matrix) -> Result<SpectralResult> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Domain("eigen-decomposition needs a square matrix".into()));
    }
    if n > MAX_DENSE_NODES {
        return Err(Error::Size(format!("{n} exceeds the dense limit of {MAX_DENSE_NODES}")));
    }
    let scale = linalg::frobenius(m);
    let asym = linalg::asymmetry(m);
    if asym > SYMMETRY_TOL * scale.max(1.0) {
        return Err(Error::Domain(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    let mut a: Vec<f64> = m.iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let target = OFF_DIAGONAL_TOL * scale;
    let mut converged = off_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let g = a[r * n + p];
                        let h = a[r * n + q];
                        let rp = g - s * (h + g * tau);
                        let rq = h + s * (g - h * tau);
                        a[r * n + p] = rp;
                        a[p * n + r] = rp;
                        a[r * n + q] = rq;
                        a[q * n + r] = rq;
                    }
                    let g = v[r * n + p];
                    let h = v[r * n + q];
                    v[r * n + p] = g - s * (h + g * tau);
                    v[r * n + q] = h + s * (g - h * tau);
                }
            }
        }
        sweeps += 1;
        converged = off_norm(&a) <= target;
    }
    if !converged {
        return Err(Error::Numeric(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for &k in &order {
        let lambda = a[k * n + k];
        let mut vec: Vec<f64> = (0..n).map(|r| v[r * n + k]).collect();
        let nv = linalg::norm(&vec);
        vec.iter_mut().for_each(|x| *x /= nv);
        apply_sign_convention(&mut vec);
        let mv = linalg::mat_vec(m, &vec);
        let res = mv.iter().zip(&vec).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        if res > RESIDUAL_TOL * scale {
            return Err(Error::Numeric(format!("eigenpair residual {res:e} for eigenvalue {lambda}")));
        }
        eigenvalues.push(lambda);
        eigenvectors.push(vec);
    }
    Ok(SpectralResult { eigenvalues, eigenvectors, geometry: Geometry::Euclidean })
}

/// Full spectrum of `-Q` for a reversible kernel.
///
/// Eigenvectors are left eigenvectors of `Q` (eigenvectors of `-Qᵀ`),
/// orthonormal in [`Geometry::of`] the kernel.
pub fn kernel_spectrum(k: &Kernel) -> Result<SpectralResult> {
    let m = kernel::symmetrize(k)?;
    let mut res = jacobi_eigen(&m.mapv(|x| -x))?;
    let geometry = Geometry::of(k);
    if let Geometry::Pi(p) = &geometry {
        let sq: Vec<f64> = p.pi().iter().map(|x| x.sqrt()).collect();
        for vec in &mut res.eigenvectors {
            vec.iter_mut().zip(&sq).for_each(|(x, s)| *x *= s);
            apply_sign_convention(vec);
        }
    }
    res.geometry = geometry;
    Ok(res)
}

/// Second-smallest eigenpair of `-Q`.
pub fn fiedler(k: &Kernel) -> Result<FiedlerPair> {
    if k.size() < 2 {
        return Err(Error::Domain("Fiedler pair needs at least two states".into()));
    }
    fiedler_from_spectrum(kernel_spectrum(k)?)
}

pub fn fiedler_from_spectrum(spec: SpectralResult) -> Result<FiedlerPair> {
    if spec.len() < 2 {
        return Err(Error::Domain("Fiedler pair needs at least two states".into()));
    }
    let l2 = spec.eigenvalues[1];
    let gap = spec.eigenvalues.get(2).map_or(f64::INFINITY, |l3| l3 - l2);
    let tol = DEGENERACY_TOL * spec.eigenvalues.last().unwrap().abs().max(1.0);
    let eigenspace: Vec<Vec<f64>> = spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .skip(1)
        .take_while(|(l, _)| **l - l2 <= tol)
        .map(|(_, v)| v.clone())
        .collect();
    Ok(FiedlerPair {
        value: l2,
        vector: spec.eigenvectors[1].clone(),
        gap,
        degenerate: eigenspace.len() > 1,
        eigenspace,
        geometry: spec.geometry,
    })
}

/// `⟨z, -Qᵀ z⟩ / ⟨z, z⟩` in the kernel's geometry.
pub fn rayleigh_quotient(z: &[f64], k: &Kernel) -> Result<f64> {
    check_len(z, k)?;
    let g = Geometry::of(k);
    let nz = g.inner(z, z);
    if nz.sqrt() < ZERO_NORM {
        return Err(Error::Degenerate("Rayleigh quotient of a zero vector".into()));
    }
    let qz = linalg::mat_t_vec(k.rates(), z);
    Ok(-g.inner(z, &qz) / nz)
}

/// `|⟨z, v⟩| / (‖z‖ ‖v‖)` in the kernel's geometry.
pub fn cosine_similarity(z: &[f64], v: &[f64], k: &Kernel) -> Result<f64> {
    check_len(z, k)?;
    check_len(v, k)?;
    let g = Geometry::of(k);
    let (nz, nv) = (g.norm(z), g.norm(v));
    if nz < ZERO_NORM || nv < ZERO_NORM {
        return Err(Error::Degenerate("cosine similarity of a zero vector".into()));
    }
    Ok((g.inner(z, v).abs() / (nz * nv)).min(1.0))
}

fn check_len(z: &[f64], k: &Kernel) -> Result<()> {
    if z.len() != k.size() {
        return Err(Error::Domain(format!("vector has {} entries for {} states", z.len(), k.size())));
    }
    Ok(())
}

/// `S = {i : v_i > 0}` after orienting `v` by the sign convention; zeros
/// go to the complement.
///
/// Orienting first makes `v` and `-v` give the identical ordered pair.
/// Zero, constant and single-signed vectors carry no cut and are rejected.
pub fn sign_partition(v: &[f64]) -> Result<(NodeSet, NodeSet)> {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 || !v.iter().all(|x| x.is_finite()) {
        return Err(Error::Degenerate("sign partition of a zero or non-finite vector".into()));
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi - lo <= 1e-12 * max {
        return Err(Error::Degenerate("sign partition of a constant vector".into()));
    }
    let mut w = v.to_vec();
    apply_sign_convention(&mut w);
    let inside: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    if inside.len() == w.len() {
        return Err(Error::Degenerate("vector has no sign change".into()));
    }
    let s = NodeSet::new(inside, w.len())?;
    let sc = s.complement(w.len());
    Ok((s, sc))
}

/// Maps a left eigenvector of the random-walk kernel to the matching
/// eigenvector of the normalized Laplacian: `v_i / √d_i`.
pub fn rw_to_normalized_fiedler(v_rw: &[f64], g: &Graph) -> Result<Vec<f64>> {
    if v_rw.len() != g.node_count() {
        return Err(Error::Domain(format!(
            "vector has {} entries for {} nodes",
            v_rw.len(),
            g.node_count()
        )));
    }
    if let Some(i) = g.degrees().iter().position(|&d| d <= 0.0) {
        return Err(Error::Domain(format!("node {i} has degree zero")));
    }
    Ok(v_rw.iter().zip(g.degrees()).map(|(v, d)| v / d.sqrt()).collect())
}

/// Inverse of [`rw_to_normalized_fiedler`].
pub fn normalized_to_rw_fiedler(v: &[f64], g: &Graph) -> Result<Vec<f64>> {
    rw_to_normalized_fiedler(v, g)?;
    Ok(v.iter().zip(g.degrees()).map(|(x, d)| x * d.sqrt()).collect())
}
