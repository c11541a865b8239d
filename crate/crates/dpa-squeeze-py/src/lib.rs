//! Python bindings. Parameters, models and states are wrapped as classes;
//! solver runs and presets return plain lists and dicts.

use std::path::PathBuf;

use core::dynamics::{mcsolve, mesolve, Observable, SolverConfig, TimeGrid, TimeSeries};
use core::meanfield::{find_min_squeezing, xi2_hpt as core_xi2_hpt};
use core::model::{apply_adiabatic_elimination, build_effective_model, build_full_model, build_tat_model};
use core::observables::{spin_moments, spin_observables, squeezing_wineland, SpinMoments};
use core::operator::destroy_in;
use core::params::derive_params;
use core::runner::{self, ExperimentConfig, PRESETS};
use core::state::coherent_state;
use core::{Error, Factor, C64};
use dpa_squeeze as core;
use pyo3::exceptions::{PyKeyError, PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::ParameterRegime(_) | Error::Usage(_) | Error::HptValidity { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::Infeasible(_) => PyMemoryError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// Physical parameters in one common rate unit.
#[pyclass(name = "ModelParams", from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: core::ModelParams,
}

#[pymethods]
impl PyModelParams {
    /// Driven reference parameters in units of `g_c`.
    #[new]
    #[pyo3(signature = (n_atoms = 50))]
    fn new(n_atoms: usize) -> Self {
        Self { inner: core::ModelParams::reference(n_atoms) }
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms
    }
    /// Changes N at fixed `g_c`.
    #[setter]
    fn set_n_atoms(&mut self, n: usize) {
        let g_c = self.inner.g_c();
        self.inner.n_atoms = n;
        self.inner.set_g_c(g_c);
    }
    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }
    #[setter]
    fn set_g(&mut self, v: f64) {
        self.inner.g = v;
    }
    #[getter]
    fn g_c(&self) -> f64 {
        self.inner.g_c()
    }
    #[setter]
    fn set_g_c(&mut self, v: f64) {
        self.inner.set_g_c(v);
    }
    #[getter]
    fn j(&self) -> f64 {
        self.inner.j
    }
    #[setter]
    fn set_j(&mut self, v: f64) {
        self.inner.j = v;
    }
    #[getter]
    fn omega(&self) -> C64 {
        self.inner.omega
    }
    #[setter]
    fn set_omega(&mut self, v: C64) {
        self.inner.omega = v;
    }
    #[getter]
    fn delta_s(&self) -> f64 {
        self.inner.delta_s
    }
    #[setter]
    fn set_delta_s(&mut self, v: f64) {
        self.inner.delta_s = v;
    }
    #[getter]
    fn delta_q(&self) -> f64 {
        self.inner.delta_q
    }
    #[setter]
    fn set_delta_q(&mut self, v: f64) {
        self.inner.delta_q = v;
    }
    #[getter]
    fn kappa_p(&self) -> f64 {
        self.inner.kappa_p
    }
    #[setter]
    fn set_kappa_p(&mut self, v: f64) {
        self.inner.kappa_p = v;
    }
    #[getter]
    fn kappa_s(&self) -> f64 {
        self.inner.kappa_s
    }
    #[setter]
    fn set_kappa_s(&mut self, v: f64) {
        self.inner.kappa_s = v;
    }
    #[getter]
    fn gamma_s(&self) -> f64 {
        self.inner.gamma_s
    }
    #[setter]
    fn set_gamma_s(&mut self, v: f64) {
        self.inner.gamma_s = v;
    }
    #[getter]
    fn gamma_c(&self) -> f64 {
        self.inner.gamma_c
    }
    #[setter]
    fn set_gamma_c(&mut self, v: f64) {
        self.inner.gamma_c = v;
    }
    #[getter]
    fn alpha0(&self) -> C64 {
        self.inner.alpha0
    }
    #[setter]
    fn set_alpha0(&mut self, v: C64) {
        self.inner.alpha0 = v;
    }
    #[getter]
    fn compensate_stark(&self) -> bool {
        self.inner.compensate_stark
    }
    #[setter]
    fn set_compensate_stark(&mut self, v: bool) {
        self.inner.compensate_stark = v;
    }
    #[getter]
    fn pump_cutoff(&self) -> Option<usize> {
        self.inner.pump_cutoff
    }
    #[setter]
    fn set_pump_cutoff(&mut self, v: Option<usize>) {
        self.inner.pump_cutoff = v;
    }
    #[getter]
    fn signal_cutoff(&self) -> Option<usize> {
        self.inner.signal_cutoff
    }
    #[setter]
    fn set_signal_cutoff(&mut self, v: Option<usize>) {
        self.inner.signal_cutoff = v;
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    /// Derived quantities (`g_eff`, `d`, `delta_big_s`, ...) as a dict.
    fn derive<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &derive_params(&self.inner).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "QuantumState", from_py_object)]
#[derive(Clone)]
struct PyQuantumState {
    inner: core::QuantumState,
}

#[pymethods]
impl PyQuantumState {
    #[staticmethod]
    fn spin_ground(n: usize) -> PyResult<Self> {
        Ok(Self { inner: core::QuantumState::spin_ground(n).map_err(to_py)? })
    }

    /// Dicke state with `S_z = two_m / 2`.
    #[staticmethod]
    fn dicke(n: usize, two_m: i64) -> PyResult<Self> {
        Ok(Self { inner: core::QuantumState::dicke(n, two_m).map_err(to_py)? })
    }

    #[staticmethod]
    fn fock(cutoff: usize, n: usize) -> PyResult<Self> {
        Ok(Self { inner: core::QuantumState::fock(cutoff, n).map_err(to_py)? })
    }

    #[staticmethod]
    fn coherent(alpha: C64, cutoff: usize) -> PyResult<Self> {
        Ok(Self { inner: coherent_state(alpha, cutoff).map_err(to_py)? })
    }

    /// Kronecker product in the given order.
    #[staticmethod]
    fn tensor(parts: Vec<PyQuantumState>) -> PyResult<Self> {
        let parts: Vec<_> = parts.into_iter().map(|p| p.inner).collect();
        Ok(Self { inner: core::QuantumState::tensor(&parts).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    #[getter]
    fn is_pure(&self) -> bool {
        self.inner.is_pure()
    }
    fn trace(&self) -> f64 {
        self.inner.trace()
    }
    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    /// Wineland parameter and squeezing angle of the spin factor.
    fn squeezing<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let m = spin_moments(&self.inner).map_err(to_py)?;
        json_to_py(py, &squeezing_wineland(&m).map_err(to_py)?)
    }
}

#[pyclass(name = "Model", skip_from_py_object)]
struct PyModel {
    inner: core::Model,
}

#[pymethods]
impl PyModel {
    /// Pump, signal and spin.
    #[staticmethod]
    fn full(params: &PyModelParams) -> PyResult<Self> {
        Ok(Self { inner: build_full_model(&params.inner).map_err(to_py)? })
    }

    /// Pump and spin with the signal mode eliminated.
    #[staticmethod]
    fn effective(params: &PyModelParams) -> PyResult<Self> {
        Ok(Self { inner: build_effective_model(&params.inner).map_err(to_py)? })
    }

    /// Effective model with the dissipators inherited from a lossy signal mode.
    #[staticmethod]
    fn eliminated(params: &PyModelParams) -> PyResult<Self> {
        let full = build_full_model(&params.inner).map_err(to_py)?;
        Ok(Self { inner: apply_adiabatic_elimination(&full, &params.inner).map_err(to_py)? })
    }

    /// Spin-only two-axis twisting with complex coupling `g_tat`.
    #[staticmethod]
    fn tat(g_tat: C64, n_atoms: usize) -> PyResult<Self> {
        Ok(Self { inner: build_tat_model(g_tat, n_atoms).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }
    #[getter]
    fn n_collapse(&self) -> usize {
        self.inner.collapse_ops.len()
    }

    /// Coherent pump `alpha0`, signal vacuum, all spins down.
    fn initial_state(&self, alpha0: C64) -> PyResult<PyQuantumState> {
        let layout = &self.inner.layout;
        let mut parts = Vec::new();
        for (slot, f) in layout.factors().iter().enumerate() {
            parts.push(
                match *f {
                    Factor::Boson { cutoff } if Some(slot) == layout.pump_slot() => coherent_state(alpha0, cutoff),
                    Factor::Boson { cutoff } => core::QuantumState::fock(cutoff, 0),
                    Factor::Spin { n } => core::QuantumState::spin_ground(n),
                }
                .map_err(to_py)?,
            );
        }
        Ok(PyQuantumState { inner: core::QuantumState::tensor(&parts).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("Model(label={:?}, dim={}, collapse_ops={})", self.inner.label, self.dim(), self.n_collapse())
    }
}

/// Sampled expectation values of the spin moments, plus `ap` when the
/// model has a pump.
#[pyclass(name = "TimeSeries", skip_from_py_object)]
struct PyTimeSeries {
    inner: TimeSeries,
    n_atoms: usize,
}

#[pymethods]
impl PyTimeSeries {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }
    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names.clone()
    }
    #[getter]
    fn ntraj(&self) -> usize {
        self.inner.ntraj
    }

    fn expect(&self, name: &str) -> PyResult<Vec<C64>> {
        self.inner.get(name).map(<[C64]>::to_vec).ok_or_else(|| PyKeyError::new_err(name.to_string()))
    }

    /// Monte Carlo standard errors; `None` for master-equation runs.
    fn std_err(&self, name: &str) -> Option<Vec<f64>> {
        self.inner.std_err(name).map(<[f64]>::to_vec)
    }

    /// Wineland parameter in dB and squeezing angle (rad) per sample.
    fn squeezing(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let mut db = Vec::with_capacity(self.inner.times.len());
        let mut theta = Vec::with_capacity(self.inner.times.len());
        for k in 0..self.inner.times.len() {
            let m = SpinMoments::from_series(&self.inner, k, self.n_atoms).map_err(to_py)?;
            let s = squeezing_wineland(&m).map_err(to_py)?;
            db.push(s.xi2_db);
            theta.push(s.theta);
        }
        Ok((db, theta))
    }

    /// Parabola-refined minimum of the squeezing curve.
    fn min_squeezing<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let (db, _) = self.squeezing()?;
        json_to_py(py, &find_min_squeezing(&self.inner.times, &db).map_err(to_py)?)
    }
}

/// Integrates `model` from `state` over `samples` points on `[0, t_end]`.
/// `method` is `"master"` or `"trajectories"`.
#[pyfunction]
#[pyo3(signature = (model, state, t_end, samples, method = "master", ntraj = 100, seed = 0, rtol = None, atol = None))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    model: &PyModel,
    state: &PyQuantumState,
    t_end: f64,
    samples: usize,
    method: &str,
    ntraj: usize,
    seed: u64,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> PyResult<PyTimeSeries> {
    let method: runner::Method = method.parse().map_err(to_py)?;
    let model = &model.inner;
    let layout = &model.layout;
    let n_atoms = layout.atom_count().ok_or_else(|| PyValueError::new_err("model has no spin factor"))?;
    let grid = TimeGrid::new(0.0, t_end, samples).map_err(to_py)?;
    let mut obs = spin_observables(layout).map_err(to_py)?;
    if let Some(slot) = layout.pump_slot() {
        obs.push(Observable::expect("ap", destroy_in(layout, slot).map_err(to_py)?));
    }
    let mut cfg = SolverConfig { ntraj, seed, ..SolverConfig::default() };
    if let Some(r) = rtol {
        cfg.rtol = r;
    }
    if let Some(a) = atol {
        cfg.atol = a;
    }
    let initial = &state.inner;
    let ts = py
        .detach(|| match method {
            runner::Method::Trajectories => mcsolve(model, initial, &grid, &obs, &cfg),
            _ => mesolve(model, initial, &grid, &obs, &cfg),
        })
        .map_err(to_py)?;
    Ok(PyTimeSeries { inner: ts, n_atoms })
}

/// Squeezing from Holstein-Primakoff moments `⟨b†b⟩`, `⟨b²⟩`.
#[pyfunction]
fn xi2_hpt(nb: f64, b2: C64, n_atoms: f64) -> PyResult<f64> {
    core_xi2_hpt(nb, b2, n_atoms).map_err(to_py)
}

/// `(name, description)` of every registered preset.
#[pyfunction]
fn list_presets() -> Vec<(&'static str, &'static str)> {
    PRESETS.iter().map(|p| (p.name, p.description)).collect()
}

fn build_config(
    preset: &str,
    out_dir: PathBuf,
    quick: bool,
    seed: u64,
    ntraj: Option<usize>,
    overrides: Option<&Bound<'_, PyDict>>,
) -> PyResult<ExperimentConfig> {
    let mut c = ExperimentConfig::new(preset);
    if let Some(ov) = overrides {
        for (k, v) in ov.iter() {
            c.set(&k.extract::<String>()?, &v.str()?.to_string()).map_err(to_py)?;
        }
    }
    c.out_dir = out_dir;
    c.quick = quick;
    c.seed = seed;
    c.ntraj = ntraj;
    c.validate().map_err(to_py)?;
    Ok(c)
}

/// Runs a preset, writes its artifacts to `out_dir` and returns the summary.
#[pyfunction]
#[pyo3(signature = (preset, out_dir, quick = false, seed = 0, ntraj = None, overrides = None))]
fn run_preset<'py>(
    py: Python<'py>,
    preset: &str,
    out_dir: PathBuf,
    quick: bool,
    seed: u64,
    ntraj: Option<usize>,
    overrides: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let c = build_config(preset, out_dir, quick, seed, ntraj, overrides)?;
    let report = py.detach(|| runner::run_preset(&c)).map_err(to_py)?;
    json_to_py(py, &report.summary)
}

/// Resolved per-run parameters of a preset without running it.
#[pyfunction]
#[pyo3(signature = (preset, quick = false, ntraj = None, overrides = None))]
fn resolve_preset<'py>(
    py: Python<'py>,
    preset: &str,
    quick: bool,
    ntraj: Option<usize>,
    overrides: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let c = build_config(preset, PathBuf::from("."), quick, 0, ntraj, overrides)?;
    json_to_py(py, &runner::resolve(&c).map_err(to_py)?.runs())
}

#[pymodule]
#[pyo3(name = "dpa_squeeze")]
pub fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyQuantumState>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyTimeSeries>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(xi2_hpt, m)?)?;
    m.add_function(wrap_pyfunction!(list_presets, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_preset, m)?)?;
    Ok(())
}
