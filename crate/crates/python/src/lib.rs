//! Python bindings: hypergraphs, the solvers, partitioning, D3C extraction,
//! perturbations and the line-clustering experiment.

use std::fs::File;
use std::io::BufReader;

use hyperrank::correction::CorrectionMode;
use hyperrank::hypergraph::{read_hypergraph, write_hypergraph};
use hyperrank::motifs::{d3c_hypergraph, filter_network, DirectedGraph};
use hyperrank::partition::{bipartition, recursive_partition, OrderingMethod, PartitionOptions};
use hyperrank::perturb::{perturb_stochastic, perturbation_bound};
use hyperrank::solver::{contraction_constant, mlppr_to_mpr, mpr_to_mlppr, solve, Model};
use hyperrank::stochastic::uniform;
use hyperrank::subspace::{cluster_and_score, generate_instance, InstanceLayout};
use hyperrank::{fixtures, Error, PageRankProblem, SolveOptions, SolveReport, UniformHypergraph};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(err) => PyIOError::new_err(err.to_string()),
        Error::NotConverged { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn method(name: &str) -> PyResult<OrderingMethod> {
    match name {
        "mlppr" => Ok(OrderingMethod::Mlppr),
        "mpr" => Ok(OrderingMethod::Mpr),
        "gpr" => Ok(OrderingMethod::Gpr),
        _ => Err(PyValueError::new_err(format!("unknown method {name:?}; use mlppr, mpr or gpr"))),
    }
}

/// Weighted k-uniform hypergraph on vertices `0..n`.
#[pyclass(name = "Hypergraph", module = "hyperrank", frozen)]
struct PyHypergraph {
    inner: UniformHypergraph,
}

#[pymethods]
impl PyHypergraph {
    /// `edges` are vertex lists; directed ones end with the head.
    #[new]
    #[pyo3(signature = (n, k, edges, weights=None, directed=false))]
    fn new(n: usize, k: usize, edges: Vec<Vec<usize>>, weights: Option<Vec<f64>>, directed: bool) -> PyResult<Self> {
        let weights = weights.unwrap_or_else(|| vec![1.0; edges.len()]);
        if weights.len() != edges.len() {
            return Err(PyValueError::new_err("weights and edges differ in length"));
        }
        let inner = UniformHypergraph::new(n, k, directed, edges.into_iter().zip(weights)).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let f = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Ok(Self { inner: read_hypergraph(BufReader::new(f)).map_err(to_py)? })
    }

    /// The 9-vertex two-clique example.
    #[staticmethod]
    fn toy() -> Self {
        Self { inner: fixtures::toy_hypergraph() }
    }

    fn write(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        write_hypergraph(f, &self.inner).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.is_directed()
    }

    fn edges(&self) -> Vec<(Vec<usize>, f64)> {
        self.inner.edges().iter().map(|e| (e.vertices().to_vec(), e.weight())).collect()
    }

    fn degrees(&self) -> Vec<f64> {
        self.inner.degrees()
    }

    fn __len__(&self) -> usize {
        self.inner.num_edges()
    }

    fn __repr__(&self) -> String {
        format!(
            "Hypergraph(n={}, k={}, edges={}, directed={})",
            self.inner.n(),
            self.inner.order(),
            self.inner.num_edges(),
            self.inner.is_directed()
        )
    }
}

fn report_dict<'py>(py: Python<'py>, r: &SolveReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("y", r.y.clone())?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("converged", r.converged)?;
    d.set_item("residual_step", r.residual_step)?;
    d.set_item("residual_eq", r.residual_eq)?;
    d.set_item("varsigma", r.varsigma)?;
    d.set_item("unique_by_contraction", r.unique_by_contraction)?;
    d.set_item("unique_by_damping", r.unique_by_damping)?;
    d.set_item("ops_per_iteration", r.ops_per_iteration)?;
    Ok(d)
}

fn problem(h: &PyHypergraph, alpha: f64, v: Option<Vec<f64>>) -> PyResult<PageRankProblem> {
    let v = v.unwrap_or_else(|| uniform(h.inner.n()));
    PageRankProblem::from_hypergraph(&h.inner, alpha, v).map_err(to_py)
}

/// Solves the PageRank problem of `h`. `model` is `mlppr` or `mpr`; the
/// result is a dict with the vector and convergence details.
#[pyfunction]
#[pyo3(signature = (h, alpha, v=None, model="mlppr", tol_step=1e-8, tol_eq=1e-10, max_iter=100_000, threads=1))]
#[allow(clippy::too_many_arguments)]
fn solve_pagerank<'py>(
    py: Python<'py>,
    h: &PyHypergraph,
    alpha: f64,
    v: Option<Vec<f64>>,
    model: &str,
    tol_step: f64,
    tol_eq: f64,
    max_iter: usize,
    threads: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let model = match model {
        "mlppr" => Model::Mlppr,
        "mpr" => Model::Mpr(CorrectionMode::Implicit),
        _ => return Err(PyValueError::new_err(format!("unknown model {model:?}; use mlppr or mpr"))),
    };
    let p = problem(h, alpha, v)?.with_model(model);
    let opts = SolveOptions { tol_step, tol_eq, max_iter, threads, ..Default::default() };
    let r = py.detach(|| solve(&p, &opts)).map_err(to_py)?;
    report_dict(py, &r)
}

/// Normalizes an MLPPR solution into the matching MPR solution.
#[pyfunction]
#[pyo3(signature = (h, alpha, y, v=None))]
fn to_mpr(h: &PyHypergraph, alpha: f64, y: Vec<f64>, v: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    mlppr_to_mpr(&problem(h, alpha, v)?, &y).map_err(to_py)
}

/// Rescales an MPR solution into the matching MLPPR solution.
#[pyfunction]
#[pyo3(signature = (h, alpha, x, v=None))]
fn to_mlppr(h: &PyHypergraph, alpha: f64, x: Vec<f64>, v: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    mpr_to_mlppr(&problem(h, alpha, v)?, &x).map_err(to_py)
}

/// `(varsigma, varsigma < 1)` for order `k` and damping `alpha`.
#[pyfunction]
fn contraction(k: usize, alpha: f64) -> (f64, bool) {
    let c = contraction_constant(k, alpha);
    (c.varsigma, c.unique_by_contraction)
}

fn partition_options(method_name: &str, alpha: f64, seed: u64) -> PyResult<PartitionOptions> {
    Ok(PartitionOptions { method: method(method_name)?, alpha, seed, ..Default::default() })
}

/// Sweep-cut bipartition; returns `(side, h_values, h_min)`.
#[pyfunction]
#[pyo3(signature = (h, method="mlppr", alpha=0.99, seed=0))]
fn bisect(
    py: Python<'_>,
    h: &PyHypergraph,
    method: &str,
    alpha: f64,
    seed: u64,
) -> PyResult<(Vec<usize>, Vec<f64>, f64)> {
    let opts = partition_options(method, alpha, seed)?;
    let cut = py.detach(|| bipartition(&h.inner, &opts)).map_err(to_py)?;
    let h_min = cut.h_min();
    Ok((cut.s, cut.h, h_min))
}

/// Recursive partition into up to `parts` pieces.
#[pyfunction]
#[pyo3(signature = (h, parts, method="mlppr", alpha=0.99, seed=0))]
fn partition(
    py: Python<'_>,
    h: &PyHypergraph,
    parts: usize,
    method: &str,
    alpha: f64,
    seed: u64,
) -> PyResult<Vec<Vec<usize>>> {
    let opts = partition_options(method, alpha, seed)?;
    let r = py.detach(|| recursive_partition(&h.inner, parts, &opts)).map_err(to_py)?;
    Ok(r.parts)
}

/// Filters a directed network to arcs on 3-cycles within its largest strong
/// component; returns the 3-cycle hypergraph and each vertex's original node.
#[pyfunction]
fn d3c_network(n: usize, arcs: Vec<(usize, usize)>) -> PyResult<(PyHypergraph, Vec<u64>)> {
    let g = DirectedGraph::from_arcs(n, arcs).map_err(to_py)?;
    let (f, d) = filter_network(&g).map_err(to_py)?;
    let h = d3c_hypergraph(&f, &d).map_err(to_py)?;
    Ok((PyHypergraph { inner: h }, f.ids().to_vec()))
}

/// Random `delta` with 1-norm `sigma` keeping `u + delta` stochastic.
#[pyfunction]
#[pyo3(signature = (u, sigma, seed=0))]
fn perturb_vector(u: Vec<f64>, sigma: f64, seed: u64) -> PyResult<Vec<f64>> {
    Ok(perturb_stochastic(&u, sigma, seed).map_err(to_py)?.delta)
}

/// A priori bound on the change of the solution.
#[pyfunction]
fn perturbation_bound_value(k: usize, alpha: f64, tensor_norm: f64, v_norm: f64) -> PyResult<f64> {
    perturbation_bound(k, alpha, tensor_norm, v_norm).map_err(to_py)
}

/// One line-clustering run; returns the success ratio.
#[pyfunction]
#[pyo3(signature = (n=100, seed=0, method="mlppr", noise_variance=0.5))]
fn subspace_run(py: Python<'_>, n: usize, seed: u64, method: &str, noise_variance: f64) -> PyResult<f64> {
    let layout = InstanceLayout { noise_variance, ..InstanceLayout::default() };
    let opts = partition_options(method, 0.99, 0)?;
    py.detach(|| {
        let ps = generate_instance(n, seed, &layout)?;
        cluster_and_score(&ps, 4, seed, &opts).map(|s| s.success_ratio)
    })
    .map_err(to_py)
}

#[pymodule(name = "hyperrank")]
fn hyperrank_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypergraph>()?;
    m.add_function(wrap_pyfunction!(solve_pagerank, m)?)?;
    m.add_function(wrap_pyfunction!(to_mpr, m)?)?;
    m.add_function(wrap_pyfunction!(to_mlppr, m)?)?;
    m.add_function(wrap_pyfunction!(contraction, m)?)?;
    m.add_function(wrap_pyfunction!(bisect, m)?)?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    m.add_function(wrap_pyfunction!(d3c_network, m)?)?;
    m.add_function(wrap_pyfunction!(perturb_vector, m)?)?;
    m.add_function(wrap_pyfunction!(perturbation_bound_value, m)?)?;
    m.add_function(wrap_pyfunction!(subspace_run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names() {
        assert_eq!(method("gpr").unwrap(), OrderingMethod::Gpr);
        assert!(method("spectral").is_err());
    }

    #[test]
    fn error_mapping_builds_without_interpreter() {
        let _ = to_py(Error::InvalidParameter("x".into()));
        let _ = to_py(Error::NotConverged { iterations: 1, residual: 1.0 });
    }
}
