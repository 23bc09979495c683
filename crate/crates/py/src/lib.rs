//! Python bindings for the core types, experiment drivers and oracles.
//! Structured results are returned as dicts decoded from their JSON form.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use kinlab::doubling::{self, PsiPair};
use kinlab::flux::{FluxModel, FluxSpec};
use kinlab::grid::{GridField, TorusGrid};
use kinlab::harness::{self, checks, Experiment, ExperimentConfig, ExperimentReport};
use kinlab::oracles;
use kinlab::solver;
use kinlab::KinError;

fn err(e: KinError) -> PyErr {
    match e {
        KinError::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn report<'py>(py: Python<'py>, r: PyResult<ExperimentReport>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &r?)
}

/// Periodic grid on [0,1)^dim with n points per axis.
#[pyclass(name = "Grid", frozen)]
#[derive(Clone, Copy)]
struct PyGrid(TorusGrid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (n, dim = 1))]
    fn new(n: usize, dim: usize) -> PyResult<Self> {
        TorusGrid::new(dim, n).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Coordinates of every grid point, flat index order.
    fn points(&self) -> Vec<Vec<f64>> {
        (0..self.0.len())
            .map(|i| self.0.point(i)[..self.0.dim()].to_vec())
            .collect()
    }

    /// σ-fractional seminorm p^σ of tabulated values.
    fn seminorm(&self, values: Vec<f64>, sigma: f64) -> PyResult<f64> {
        let f = GridField::new(self.0, values).map_err(err)?;
        kinlab::grid::seminorm_p_sigma(&f, sigma).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, dim={})", self.0.n(), self.0.dim())
    }
}

/// Hat kernel ψ_δ with its antiderivatives ψ₁ and ψ₂.
#[pyclass(name = "Psi", frozen)]
struct PyPsi(PsiPair);

#[pymethods]
impl PyPsi {
    #[new]
    fn new(delta: f64) -> PyResult<Self> {
        doubling::build_psi(delta).map(Self).map_err(err)
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    fn psi(&self, r: f64) -> f64 {
        self.0.psi(r)
    }

    fn psi1(&self, r: f64) -> f64 {
        self.0.psi1(r)
    }

    fn psi2(&self, r: f64) -> f64 {
        self.0.psi2(r)
    }

    /// Υ(ξ,ζ) for the named flux.
    #[pyo3(signature = (xi, zeta, flux = "burgers"))]
    fn upsilon(&self, xi: f64, zeta: f64, flux: &str) -> PyResult<f64> {
        let f = flux_model(flux)?;
        Ok(doubling::upsilon(xi, zeta, &self.0, &f))
    }

    fn check<'py>(&self, py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.check(samples))
    }
}

fn flux_model(name: &str) -> PyResult<FluxModel> {
    let spec = FluxSpec {
        name: name.into(),
        ..Default::default()
    };
    FluxModel::from_spec(&spec, 1).map_err(err)
}

/// Validated experiment configuration.
#[pyclass(name = "Config")]
#[derive(Clone)]
struct PyConfig(ExperimentConfig);

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        ExperimentConfig::from_json(s).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        harness::parse_config(path.as_ref()).map(Self).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    fn hash(&self) -> String {
        self.0.hash()
    }

    #[getter]
    fn master_seed(&self) -> u64 {
        self.0.master_seed
    }

    #[setter]
    fn set_master_seed(&mut self, v: u64) {
        self.0.master_seed = v;
    }

    #[getter]
    fn ensemble_size(&self) -> usize {
        self.0.ensemble_size
    }

    #[setter]
    fn set_ensemble_size(&mut self, v: usize) -> PyResult<()> {
        let mut c = self.0.clone();
        c.ensemble_size = v;
        c.validate().map_err(err)?;
        self.0 = c;
        Ok(())
    }

    fn path_seeds(&self) -> Vec<u64> {
        harness::path_seeds(self.0.master_seed, self.0.ensemble_size)
    }

    /// Runs one path and returns its snapshots, ledger and step data.
    fn simulate_path<'py>(&self, py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let cfg = self.0.solver_config().map_err(err)?;
        let run = py
            .allow_threads(|| solver::run_path(&cfg, seed))
            .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("seed", run.path_seed)?;
        d.set_item("dt", run.dt_used)?;
        d.set_item("steps", run.step_count)?;
        d.set_item("cfl_violations", run.cfl_violations)?;
        d.set_item(
            "times",
            run.snapshots.iter().map(|s| s.t).collect::<Vec<_>>(),
        )?;
        d.set_item(
            "snapshots",
            run.snapshots
                .iter()
                .map(|s| s.field.values.clone())
                .collect::<Vec<_>>(),
        )?;
        d.set_item("ledger", to_py(py, &run.ledger)?)?;
        Ok(d.into_any())
    }

    /// Runs `simulate`, `contraction`, `viscosity`, `regularity` or `energy`.
    #[pyo3(signature = (kind, threads = 0))]
    fn run<'py>(&self, py: Python<'py>, kind: &str, threads: usize) -> PyResult<Bound<'py, PyAny>> {
        let e = Experiment::parse(kind).map_err(err)?;
        let cfg = self.0.clone();
        let r = py.allow_threads(|| match e {
            Experiment::Simulate => harness::run_simulate(&cfg, threads, None).map(|(r, _)| r),
            _ => harness::run_experiment(e, &cfg, threads),
        });
        report(py, r.map_err(err))
    }

    /// Runs an experiment and writes the manifest, table and report to `out`.
    #[pyo3(signature = (kind, out, threads = 0))]
    fn run_and_write<'py>(
        &self,
        py: Python<'py>,
        kind: &str,
        out: &str,
        threads: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let e = Experiment::parse(kind).map_err(err)?;
        let cfg = self.0.clone();
        let out = std::path::PathBuf::from(out);
        std::fs::create_dir_all(&out).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let r = py.allow_threads(|| harness::run_and_write(e, &cfg, threads, &out));
        report(py, r.map_err(err))
    }

    /// Runs `d0d1` or `gamma` against this config.
    fn check<'py>(&self, py: Python<'py>, kind: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = match kind {
            "d0d1" => checks::check_d0d1(&self.0),
            "gamma" => checks::check_flux_gamma(&self.0),
            _ => return Err(PyValueError::new_err(format!("unknown check {kind}"))),
        };
        report(py, r.map_err(err))
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(scenario={:?}, n={}, paths={})",
            self.0.scenario, self.0.grid.n, self.0.ensemble_size
        )
    }
}

/// Runs `collapse`, `riemann` or `psipair` with parameters as a JSON string.
#[pyfunction]
#[pyo3(signature = (kind, params = "{}"))]
fn oracle<'py>(py: Python<'py>, kind: &str, params: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = match kind {
        "collapse" => checks::parse_params(params).and_then(|p| checks::run_collapse_oracle(&p)),
        "riemann" => checks::parse_params(params).and_then(|p| checks::run_riemann_oracle(&p)),
        "psipair" => checks::parse_params(params).and_then(|p| checks::check_psi_pair(&p)),
        _ => return Err(PyValueError::new_err(format!("unknown oracle {kind}"))),
    };
    report(py, r.map_err(err))
}

/// Entropy solution of the Burgers Riemann problem on the line.
#[pyfunction]
fn burgers_riemann(u_left: f64, u_right: f64, x: f64, t: f64) -> f64 {
    oracles::burgers_riemann(u_left, u_right, x, t)
}

/// Seed of path `index` under `master_seed`.
#[pyfunction]
fn path_seed(master_seed: u64, index: u64) -> u64 {
    harness::path_seed(master_seed, index)
}

#[pymodule]
#[pyo3(name = "kinlab")]
fn kinlab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyPsi>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(burgers_riemann, m)?)?;
    m.add_function(wrap_pyfunction!(path_seed, m)?)?;
    Ok(())
}
