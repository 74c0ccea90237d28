//! Python bindings: `import latpat`.
//!
//! Reports come back as plain dicts with the same layout as the CLI's JSON
//! files. Validation errors raise `ValueError`; numerical failures raise
//! `RuntimeError`.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use latpat::analysis::{find_homogeneous_fixed_point, Tolerances};
use latpat::config::{GraphSource, RunConfig};
use latpat::graph::{ContactGraph, GraphGenerator};
use latpat::model::{BuiltinModel, Characteristic};
use latpat::pipeline::{self, EnsembleReport, SimulationOutput, ToolInfo};
use latpat::sim::SnapshotMeta;

fn to_py(e: latpat::Error) -> PyErr {
    let msg = format!("{}: {e}", e.code());
    if e.is_validation() {
        PyValueError::new_err(msg)
    } else {
        PyRuntimeError::new_err(msg)
    }
}

fn to_dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Parses a TOML run config, optionally replacing its graph.
fn load(config: &str, generator: Option<&str>, seed: Option<u64>) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::from_toml_str(config).map_err(to_py)?;
    if let Some(g) = generator {
        cfg.graph = Some(GraphSource::generator(g.parse::<GraphGenerator>().map_err(to_py)?));
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Cell-contact graph.
#[pyclass(name = "Graph", frozen)]
struct PyGraph(ContactGraph);

#[pymethods]
impl PyGraph {
    #[new]
    fn new(nodes: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        ContactGraph::new(nodes, &edges).map(Self).map_err(to_py)
    }

    /// Builds a graph from a generator spec such as `cycle:4` or `grid:2x3`.
    #[staticmethod]
    fn generate(spec: &str) -> PyResult<Self> {
        let g = spec.parse::<GraphGenerator>().map_err(to_py)?;
        g.build().map(Self).map_err(to_py)
    }

    /// Parses an edge-list file body (`N E` header, then `i j` lines).
    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        ContactGraph::parse_edge_list(text).map(Self).map_err(to_py)
    }

    fn to_edge_list(&self) -> String {
        self.0.to_edge_list()
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.0.node_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().to_vec()
    }

    fn degrees(&self) -> Vec<usize> {
        self.0.degrees()
    }

    /// Random-walk eigenvalues in descending order.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        Ok(self.0.spectrum().map_err(to_py)?.eigenvalues)
    }

    /// `(I, I')` node sets, or `None` for a non-bipartite graph.
    fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        self.0.bipartition().map(|b| (b.set_i, b.set_i_prime))
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.0.node_count(), self.0.edge_count())
    }
}

/// Cell model built from the `[model]` section of a run config.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    model: BuiltinModel,
    config: RunConfig,
}

impl PyModel {
    fn characteristic(&self) -> Characteristic<'_> {
        Characteristic::with_config(&self.model, self.config.solver.clone())
    }
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_toml(config: &str) -> PyResult<Self> {
        let config = load(config, None, None)?;
        let model = config.model.build().map_err(to_py)?;
        Ok(Self { model, config })
    }

    /// Input/output dimension.
    #[getter]
    fn io_dim(&self) -> usize {
        self.characteristic().io_dim()
    }

    /// Characteristic `T(u)`.
    fn t(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        self.characteristic().t(&u).map_err(to_py)
    }

    /// Jacobian `T'(u)` as a list of rows.
    fn t_prime(&self, u: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.characteristic().t_prime(&u).map_err(to_py)?))
    }

    /// Homogeneous fixed point: dict with `u_star`, `x_star`, `t_prime`, `rho`.
    fn fixed_point(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let tol: &Tolerances = &self.config.tolerances;
        let hs = find_homogeneous_fixed_point(&self.characteristic(), tol).map_err(to_py)?;
        let value = serde_json::json!({
            "u_star": hs.u_star,
            "x_star": hs.x_star,
            "t_prime": rows(&hs.t_prime),
            "rho": hs.rho,
        });
        to_dict(py, &value)
    }
}

/// Analysis report for a TOML run config.
#[pyfunction]
#[pyo3(signature = (config, generator = None))]
fn analyze(py: Python<'_>, config: &str, generator: Option<&str>) -> PyResult<Py<PyAny>> {
    let cfg = load(config, generator, None)?;
    let report = py.detach(|| pipeline::analyze(&cfg, None)).map_err(to_py)?;
    to_dict(py, &report)
}

/// Certification report; needs no graph.
#[pyfunction]
fn certify(py: Python<'_>, config: &str) -> PyResult<Py<PyAny>> {
    let cfg = load(config, None, None)?;
    let report = py.detach(|| pipeline::certify(&cfg)).map_err(to_py)?;
    to_dict(py, &report)
}

/// Simulation: snapshot metadata plus `final_state`, or ensemble statistics.
#[pyfunction]
#[pyo3(signature = (config, generator = None, seed = None))]
fn simulate(py: Python<'_>, config: &str, generator: Option<&str>, seed: Option<u64>) -> PyResult<Py<PyAny>> {
    let cfg = load(config, generator, seed)?;
    let out = py.detach(|| pipeline::simulate(&cfg, None)).map_err(to_py)?;
    match out {
        SimulationOutput::Single { result, .. } => {
            let mut value = serde_json::to_value(SnapshotMeta::from(&result))
                .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
            value["final_state"] = serde_json::json!(result.final_state);
            to_dict(py, &value)
        }
        SimulationOutput::Ensemble(stats) => to_dict(
            py,
            &EnsembleReport {
                tool: ToolInfo::current(),
                config: cfg,
                stats,
            },
        ),
    }
}

/// Parameter sweep; `spec` is `KEY=LO:HI:STEPS` and overrides `[sweep]`.
#[pyfunction]
#[pyo3(signature = (config, spec = None, generator = None))]
fn sweep(py: Python<'_>, config: &str, spec: Option<&str>, generator: Option<&str>) -> PyResult<Py<PyAny>> {
    let mut cfg = load(config, generator, None)?;
    if let Some(s) = spec {
        cfg.sweep = Some(s.parse().map_err(to_py)?);
    }
    let rows = py.detach(|| pipeline::sweep(&cfg, None)).map_err(to_py)?;
    to_dict(py, &rows)
}

#[pymodule]
#[pyo3(name = "latpat")]
fn latpat_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", pipeline::TOOL_VERSION)?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
