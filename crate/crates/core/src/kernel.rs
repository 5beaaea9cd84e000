//! Continuous-time Markov chain kernels, stationary distributions and the
//! π-weighted geometry used for reversible chains.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, MAX_DENSE_NODES};
use crate::linalg::{self, Matrix};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;
const DETAILED_BALANCE_TOL: f64 = 1e-10;
const STOCHASTIC_TOL: f64 = 1e-12;

/// Rate matrix `Q` of an irreducible CTMC with its stationary distribution.
///
/// Rows of `Q` sum to zero and off-diagonal rates are nonnegative. The
/// reversibility flag is computed from the detailed balance residual, never
/// assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rates: Matrix,
    stationary: Vec<f64>,
    reversible: bool,
}

/// How a kernel is derived from a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `Q = -L`, uniform stationary distribution.
    #[default]
    Combinatorial,
    /// `Q = D^{-1}A - I`, stationary distribution proportional to degree.
    RandomWalk,
}

impl KernelKind {
    pub fn build(self, g: &Graph) -> Result<Kernel> {
        match self {
            KernelKind::Combinatorial => {
                if !graph::is_connected(g) {
                    return Err(Error::Disconnected("combinatorial kernel needs a connected graph".into()));
                }
                Kernel::from_combinatorial_laplacian(&graph::combinatorial_laplacian(g)?)
            }
            KernelKind::RandomWalk => random_walk_kernel(g),
        }
    }
}

impl Kernel {
    /// Validates a generator, solves for its stationary distribution and
    /// tests detailed balance.
    pub fn from_rates(rates: Matrix) -> Result<Self> {
        validate_generator(&rates)?;
        if !support_strongly_connected(&rates) {
            return Err(Error::InvalidKernel("rate matrix is reducible".into()));
        }
        let stationary = stationary_distribution(&rates)?;
        Ok(Self::assemble(rates, stationary))
    }

    /// Like [`Kernel::from_rates`] but with a caller-supplied stationary distribution.
    pub fn from_rates_with_stationary(rates: Matrix, pi: Vec<f64>) -> Result<Self> {
        validate_generator(&rates)?;
        PiInnerProduct::new(pi.clone())?;
        if pi.len() != rates.nrows() {
            return Err(Error::Domain(format!(
                "stationary vector has {} entries for {} states",
                pi.len(),
                rates.nrows()
            )));
        }
        let residual = linalg::mat_t_vec(&rates, &pi).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if residual > STATIONARY_TOL * rate_scale(&rates) {
            return Err(Error::InvalidKernel(format!(
                "supplied distribution is not stationary (residual {residual:e})"
            )));
        }
        Ok(Self::assemble(rates, pi))
    }

    /// `Q = -L` with uniform stationary distribution.
    pub fn from_combinatorial_laplacian(l: &Matrix) -> Result<Self> {
        let n = l.nrows();
        if l.ncols() != n || n == 0 {
            return Err(Error::InvalidKernel("Laplacian must be a nonempty square matrix".into()));
        }
        let rates = l.mapv(|v| -v);
        validate_generator(&rates)?;
        let stationary = vec![1.0 / n as f64; n];
        Ok(Self::assemble(rates, stationary))
    }

    /// `Q = P - I` for a row-stochastic, irreducible `P`.
    pub fn from_dtmc(p: &Matrix) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n || n == 0 {
            return Err(Error::InvalidKernel("transition matrix must be nonempty and square".into()));
        }
        for i in 0..n {
            let row = p.row(i);
            if let Some(j) = row.iter().position(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::InvalidKernel(format!("P[{i},{j}] = {} is not a probability", p[[i, j]])));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidKernel(format!("row {i} of P sums to {s}")));
            }
        }
        let mut rates = p.clone();
        for i in 0..n {
            rates[[i, i]] -= 1.0;
        }
        if !support_strongly_connected(&rates) {
            return Err(Error::InvalidKernel("transition matrix is reducible".into()));
        }
        Self::from_rates(rates)
    }

    fn assemble(rates: Matrix, stationary: Vec<f64>) -> Self {
        let residual = check_detailed_balance(&rates, &stationary);
        let reversible = residual <= DETAILED_BALANCE_TOL * rate_scale(&rates).max(1.0);
        Self { rates, stationary, reversible }
    }

    pub fn size(&self) -> usize {
        self.rates.nrows()
    }

    pub fn rates(&self) -> &Matrix {
        &self.rates
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    /// True when every stationary mass equals `1/N` (to 1e-14 relative).
    pub fn has_uniform_stationary(&self) -> bool {
        let u = 1.0 / self.size() as f64;
        self.stationary.iter().all(|&p| (p - u).abs() <= 1e-14 * u)
    }

    pub fn inner_product(&self) -> PiInnerProduct {
        PiInnerProduct { pi: self.stationary.clone() }
    }

    pub fn detailed_balance_residual(&self) -> f64 {
        check_detailed_balance(&self.rates, &self.stationary)
    }

    /// Total exit rate `-Q_ii` of each state.
    pub fn exit_rates(&self) -> Vec<f64> {
        (0..self.size()).map(|i| -self.rates[[i, i]]).collect()
    }

    /// Positive off-diagonal rates per row, in column order.
    pub fn sparse_rows(&self) -> Vec<Vec<(usize, f64)>> {
        self.rates
            .outer_iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, &q)| j != i && q > 0.0)
                    .map(|(j, &q)| (j, q))
                    .collect()
            })
            .collect()
    }

    /// Largest exit rate.
    pub fn max_exit_rate(&self) -> f64 {
        self.exit_rates().into_iter().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> KernelJson {
        KernelJson {
            n: self.size(),
            rates: self.rates.iter().copied().collect(),
            pi: Some(self.stationary.clone()),
        }
    }

    pub fn from_json(k: &KernelJson) -> Result<Self> {
        if k.rates.len() != k.n * k.n {
            return Err(Error::Domain(format!(
                "kernel JSON declares n = {} but has {} rates",
                k.n,
                k.rates.len()
            )));
        }
        let rates = Array2::from_shape_vec((k.n, k.n), k.rates.clone())
            .map_err(|e| Error::Domain(e.to_string()))?;
        match &k.pi {
            Some(pi) => Self::from_rates_with_stationary(rates, pi.clone()),
            None => Self::from_rates(rates),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

/// Serialized kernel: `n`, dense row-major `rates`, optional `pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelJson {
    pub n: usize,
    pub rates: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
}

fn rate_scale(q: &Matrix) -> f64 {
    (0..q.nrows()).map(|i| q[[i, i]].abs()).fold(1.0, f64::max)
}

fn validate_generator(q: &Matrix) -> Result<()> {
    let n = q.nrows();
    if q.ncols() != n || n == 0 {
        return Err(Error::InvalidKernel("rate matrix must be nonempty and square".into()));
    }
    if n > MAX_DENSE_NODES {
        return Err(Error::Size(format!("{n} states exceeds the dense limit of {MAX_DENSE_NODES}")));
    }
    let scale = rate_scale(q);
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            let v = q[[i, j]];
            if !v.is_finite() {
                return Err(Error::InvalidKernel(format!("Q[{i},{j}] is not finite")));
            }
            if i != j && v < 0.0 {
                return Err(Error::InvalidKernel(format!("negative off-diagonal rate Q[{i},{j}] = {v}")));
            }
            sum += v;
        }
        if sum.abs() > ROW_SUM_TOL * scale {
            return Err(Error::InvalidKernel(format!("row {i} sums to {sum:e}, expected 0")));
        }
    }
    Ok(())
}

/// Strong connectivity of the directed graph with arcs `i -> j` where `Q_ij > 0`.
fn support_strongly_connected(q: &Matrix) -> bool {
    let n = q.nrows();
    let reach = |forward: bool| -> usize {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let w = if forward { q[[u, v]] } else { q[[v, u]] };
                if v != u && w > 0.0 && !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count
    };
    reach(true) == n && reach(false) == n
}

/// Random-walk kernel `Q = D^{-1}A - I` with `π = d / Σd`.
pub fn random_walk_kernel(g: &Graph) -> Result<Kernel> {
    if !graph::is_connected(g) {
        return Err(Error::Disconnected("random-walk kernel needs a connected graph".into()));
    }
    let l = graph::random_walk_laplacian(g)?;
    let rates = l.mapv(|v| -v);
    let total: f64 = g.degrees().iter().sum();
    let pi = g.degrees().iter().map(|d| d / total).collect();
    validate_generator(&rates)?;
    Ok(Kernel::assemble(rates, pi))
}

/// Solves `πᵀQ = 0, Σπ = 1` by replacing the last equation with the
/// normalization and eliminating with partial pivoting.
pub fn stationary_distribution(q: &Matrix) -> Result<Vec<f64>> {
    let n = q.nrows();
    let mut a = q.t().to_owned();
    for j in 0..n {
        a[[n - 1, j]] = 1.0;
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = linalg::solve(&a, &b)?;
    if let Some(i) = pi.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::Numeric(format!(
            "stationary distribution has non-positive entry {} at state {i}",
            pi[i]
        )));
    }
    Ok(pi)
}

/// `max_{i≠j} |π_i Q_ij - π_j Q_ji|`.
pub fn check_detailed_balance(q: &Matrix, pi: &[f64]) -> f64 {
    let n = q.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((pi[i] * q[[i, j]] - pi[j] * q[[j, i]]).abs());
        }
    }
    worst
}

/// `⟨x, y⟩ = Σ x_i y_i / π_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiInnerProduct {
    pi: Vec<f64>,
}

impl PiInnerProduct {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() || pi.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::Domain("stationary distribution must be strictly positive".into()));
        }
        let s: f64 = pi.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("stationary distribution sums to {s}")));
        }
        Ok(Self { pi })
    }

    pub fn uniform(n: usize) -> Self {
        Self { pi: vec![1.0 / n as f64; n] }
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.pi.len());
        x.iter().zip(y).zip(&self.pi).map(|((a, b), p)| a * b / p).sum()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).sqrt()
    }
}

/// Convenience wrapper for [`PiInnerProduct::inner`].
pub fn pi_inner(p: &PiInnerProduct, x: &[f64], y: &[f64]) -> f64 {
    p.inner(x, y)
}

/// `M = Π^{1/2} Q Π^{-1/2}`, exactly symmetrized after the reversibility check.
pub fn symmetrize(k: &Kernel) -> Result<Matrix> {
    if !k.is_reversible() {
        return Err(Error::Domain(format!(
            "kernel is not reversible (detailed balance residual {:e})",
            k.detailed_balance_residual()
        )));
    }
    let n = k.size();
    let sq: Vec<f64> = k.stationary().iter().map(|p| p.sqrt()).collect();
    let q = k.rates();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = sq[i] * q[[i, j]] / sq[j];
        }
    }
    let asym = linalg::asymmetry(&m);
    if asym > 1e-10 * rate_scale(q) {
        return Err(Error::Numeric(format!("symmetrized kernel has asymmetry {asym:e}")));
    }
    let mt = m.t().to_owned();
    Ok((m + mt) * 0.5)
}
