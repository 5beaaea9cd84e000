//! Python module `fiedler_walk`.

use fiedler_core::harness::{self, ExperimentConfig};
use fiedler_core::kernel::KernelKind;
use fiedler_core::ode::{self, DeviationBoundInputs, DtPolicy, IntegrateOptions};
use fiedler_core::{spectral, Error, Graph, Kernel};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        e if e.is_numeric() => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn build_kernel(nodes: usize, edges: Vec<(usize, usize)>, weights: Option<Vec<f64>>, kind: &str) -> PyResult<(Graph, Kernel)> {
    let weights = weights.unwrap_or_else(|| vec![1.0; edges.len()]);
    if weights.len() != edges.len() {
        return Err(PyValueError::new_err("weights and edges differ in length"));
    }
    let kind = match kind {
        "combinatorial" => KernelKind::Combinatorial,
        "random_walk" => KernelKind::RandomWalk,
        other => return Err(PyValueError::new_err(format!("unknown kernel kind `{other}`"))),
    };
    let g = Graph::from_edges(nodes, edges.into_iter().zip(weights).map(|((u, v), w)| (u, v, w))).map_err(to_py)?;
    let k = kind.build(&g).map_err(to_py)?;
    Ok((g, k))
}

/// Eigenvalues of `-Q` in ascending order and the matching eigenvectors.
#[pyfunction]
#[pyo3(signature = (nodes, edges, weights=None, kind="combinatorial"))]
fn spectrum(
    nodes: usize,
    edges: Vec<(usize, usize)>,
    weights: Option<Vec<f64>>,
    kind: &str,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let (_, k) = build_kernel(nodes, edges, weights, kind)?;
    let s = spectral::kernel_spectrum(&k).map_err(to_py)?;
    Ok((s.eigenvalues, s.eigenvectors))
}

/// `(λ₂, v₂, degenerate)` of the graph's kernel.
#[pyfunction]
#[pyo3(signature = (nodes, edges, weights=None, kind="combinatorial"))]
fn fiedler(nodes: usize, edges: Vec<(usize, usize)>, weights: Option<Vec<f64>>, kind: &str) -> PyResult<(f64, Vec<f64>, bool)> {
    let (_, k) = build_kernel(nodes, edges, weights, kind)?;
    let p = spectral::fiedler(&k).map_err(to_py)?;
    Ok((p.value, p.vector, p.degenerate))
}

/// Node indices with positive and non-positive entries after orienting `v`.
#[pyfunction]
fn sign_partition(v: Vec<f64>) -> PyResult<(Vec<usize>, Vec<usize>)> {
    let (s, sc) = spectral::sign_partition(&v).map_err(to_py)?;
    Ok((s.members().to_vec(), sc.members().to_vec()))
}

/// Integrates the fluid limit and returns `(t, rq, cs, v, lambda)` rows.
#[pyfunction]
#[pyo3(signature = (nodes, edges, x0, y0, kappa, horizon, weights=None, kind="combinatorial", dt_max=0.01))]
#[allow(clippy::too_many_arguments)]
fn ode_series(
    nodes: usize,
    edges: Vec<(usize, usize)>,
    x0: Vec<f64>,
    y0: Vec<f64>,
    kappa: f64,
    horizon: f64,
    weights: Option<Vec<f64>>,
    kind: &str,
    dt_max: f64,
) -> PyResult<Vec<(f64, f64, f64, f64, f64)>> {
    let (_, k) = build_kernel(nodes, edges, weights, kind)?;
    let mut opts = IntegrateOptions::new(horizon);
    opts.policy = DtPolicy { dt_max, ..DtPolicy::default() };
    let rows = harness::ode_series(&x0, &y0, &k, kappa, &opts).map_err(to_py)?;
    Ok(rows.into_iter().map(|r| (r.t, r.rq, r.cs, r.v, r.lambda)).collect())
}

/// Runs the experiment described by a JSON config file and returns the
/// metric series as CSV text.
#[pyfunction]
#[pyo3(signature = (config_path, jobs=1))]
fn run_experiment(py: Python<'_>, config_path: std::path::PathBuf, jobs: usize) -> PyResult<String> {
    py.detach(|| {
        let cfg = ExperimentConfig::from_path(&config_path)?;
        let topo = harness::load_topology(&cfg)?;
        let series = harness::run_experiment(&cfg, &topo, jobs)?;
        let mut buf = Vec::new();
        series.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    })
    .map_err(to_py)
}

/// `(raw, clamped)` deviation bound.
#[pyfunction]
fn deviation_bound(n: u64, kappa: f64, nodes: usize, horizon: f64, epsilon: f64, m: f64) -> PyResult<(f64, f64)> {
    let b = ode::deviation_bound(&DeviationBoundInputs { n, kappa, nodes, horizon, epsilon, m }).map_err(to_py)?;
    Ok((b.raw, b.probability))
}

/// `h(x) = (1 + x) ln(1 + x) - x`.
#[pyfunction]
fn h(x: f64) -> f64 {
    ode::h(x)
}

#[pymodule]
fn fiedler_walk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(fiedler, m)?)?;
    m.add_function(wrap_pyfunction!(sign_partition, m)?)?;
    m.add_function(wrap_pyfunction!(ode_series, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(deviation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(h, m)?)?;
    Ok(())
}
