//! Small dense helpers shared by the kernel, spectral and ODE modules.

use ndarray::Array2;

use crate::error::{Error, Result};

pub type Matrix = Array2<f64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest `|m_ij - m_ji|`.
pub fn asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    worst
}

pub fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    m.rows().into_iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `m^T v`.
pub fn mat_t_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.ncols()];
    for (i, row) in m.rows().into_iter().enumerate() {
        let vi = v[i];
        if vi == 0.0 {
            continue;
        }
        for (o, a) in out.iter_mut().zip(row.iter()) {
            *o += a * vi;
        }
    }
    out
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot smaller than `1e-13 * max|a_ij|` is treated as singular.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Domain(format!(
            "solve: matrix is {}x{} but right-hand side has length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, m[[r, col]].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs < 1e-13 * scale {
            return Err(Error::Numeric(format!(
                "singular system: pivot {pivot_abs:e} in column {col}"
            )));
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap([col, k], [pivot_row, k]);
            }
            rhs.swap(col, pivot_row);
        }
        let p = m[[col, col]];
        for r in (col + 1)..n {
            let f = m[[r, col]] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[[r, k]] -= f * m[[col, k]];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for k in (r + 1)..n {
            acc -= m[[r, k]] * x[k];
        }
        x[r] = acc / m[[r, r]];
    }
    Ok(x)
}

/// Spectral norm `||m||_2` by power iteration on `m^T m`.
pub fn spectral_norm(m: &Matrix, max_iter: usize, tol: f64) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    // A fixed, non-symmetric start vector avoids landing exactly in a
    // structured invariant subspace (e.g. the constant vector).
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i * 7919) % 13) as f64).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|a| *a /= nv);
    let mut sigma_sq = 0.0;
    for _ in 0..max_iter {
        let w = mat_t_vec(m, &mat_vec(m, &v));
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw;
        v = w.into_iter().map(|a| a / nw).collect();
        if (next - sigma_sq).abs() <= tol * next {
            sigma_sq = next;
            break;
        }
        sigma_sq = next;
    }
    sigma_sq.sqrt()
}
