//! Python bindings for `pidtune`.
//!
//! Gains and plant parameters are small classes; everything structured
//! (trial configs, results, summaries) crosses the boundary as plain
//! dicts and lists via JSON.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

use pidtune::metrics::{self, Constraints};
use pidtune::plant::run_experiment;
use pidtune::report::{self, Bandwidth};
use pidtune::trials::{self, EecLevel, InitialState, TrialSettings, WorkbenchConfig};
use pidtune::{ExperimentTrace, OptimizerKind, RobotKind, TrialConfig, TrialResult};

fn to_py_err(e: pidtune::Error) -> PyErr {
    if e.is_io() {
        PyIOError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_python<T: DeserializeOwned>(value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = value.py().import("json")?.call_method1("dumps", (value,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse_robot(name: &str) -> PyResult<RobotKind> {
    name.parse().map_err(to_py_err)
}

fn parse_optimizer(name: &str) -> PyResult<OptimizerKind> {
    match name {
        "de" => Ok(OptimizerKind::De),
        "bo" => Ok(OptimizerKind::Bo),
        other => Err(PyValueError::new_err(format!("unknown optimizer {other:?}, expected \"de\" or \"bo\""))),
    }
}

fn load_config(toml: Option<&str>) -> PyResult<WorkbenchConfig> {
    match toml {
        Some(text) => WorkbenchConfig::from_toml_str(text).map_err(to_py_err),
        None => Ok(WorkbenchConfig::default()),
    }
}

#[pyclass(name = "GainVector", module = "pidtune_py", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyGainVector(pidtune::GainVector);

#[pymethods]
impl PyGainVector {
    #[new]
    fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self(pidtune::GainVector::new(kp, ki, kd))
    }

    #[getter]
    fn kp(&self) -> f64 {
        self.0.kp
    }

    #[getter]
    fn ki(&self) -> f64 {
        self.0.ki
    }

    #[getter]
    fn kd(&self) -> f64 {
        self.0.kd
    }

    #[pyo3(name = "to_list")]
    fn as_list(&self) -> Vec<f64> {
        self.0.to_array().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("GainVector(kp={}, ki={}, kd={})", self.0.kp, self.0.ki, self.0.kd)
    }
}

#[pyclass(name = "PlantParams", module = "pidtune_py", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyPlantParams(pidtune::PlantParams);

#[pymethods]
impl PyPlantParams {
    #[new]
    #[pyo3(signature = (inertia, damping, command_limit, noise_std = 0.0))]
    fn new(inertia: f64, damping: f64, command_limit: f64, noise_std: f64) -> PyResult<Self> {
        let p = pidtune::PlantParams { inertia, damping, command_limit, noise_std };
        p.validate().map_err(to_py_err)?;
        Ok(Self(p))
    }

    /// Default parameters for `"ddrm"` or `"omnidirectional"`.
    #[staticmethod]
    fn for_robot(robot: &str) -> PyResult<Self> {
        Ok(Self(parse_robot(robot)?.default_setup().plant))
    }

    #[getter]
    fn inertia(&self) -> f64 {
        self.0.inertia
    }

    #[getter]
    fn damping(&self) -> f64 {
        self.0.damping
    }

    #[getter]
    fn command_limit(&self) -> f64 {
        self.0.command_limit
    }

    #[getter]
    fn noise_std(&self) -> f64 {
        self.0.noise_std
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "PlantParams(inertia={}, damping={}, command_limit={}, noise_std={})",
            p.inertia, p.damping, p.command_limit, p.noise_std
        )
    }
}

fn evaluation_dict<'py>(py: Python<'py>, trace: &ExperimentTrace, threshold_ms: f64) -> PyResult<Bound<'py, PyDict>> {
    let eval = metrics::evaluate(trace, &Constraints::default(), threshold_ms).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("metrics", to_python(py, &eval.metrics)?)?;
    d.set_item("accepted", eval.accepted)?;
    d.set_item("fitness", eval.fitness)?;
    d.set_item("converged", eval.converged)?;
    d.set_item("violations", eval.violations)?;
    Ok(d)
}

/// Simulate one step response with in-bounds gains. Returns the trace and
/// its evaluation.
#[pyfunction]
#[pyo3(signature = (gains, robot = "ddrm", seed = 0, plant = None, objective_threshold_ms = 2500.0))]
fn simulate<'py>(
    py: Python<'py>,
    gains: PyGainVector,
    robot: &str,
    seed: u64,
    plant: Option<PyPlantParams>,
    objective_threshold_ms: f64,
) -> PyResult<Bound<'py, PyDict>> {
    pidtune::Bounds::default().check(&gains.0).map_err(to_py_err)?;
    let setup = parse_robot(robot)?.default_setup();
    let plant = plant.map_or(setup.plant, |p| p.0);
    let trace = run_experiment(&gains.0, &plant, &setup.experiment, seed).map_err(to_py_err)?;
    let d = evaluation_dict(py, &trace, objective_threshold_ms)?;
    d.set_item("dt_ms", trace.dt_ms())?;
    d.set_item("samples", trace.samples().to_vec())?;
    d.set_item("commands", trace.commands().to_vec())?;
    Ok(d)
}

/// Metrics and acceptance for an arbitrary sampled response.
#[pyfunction]
#[pyo3(signature = (samples, dt_ms = 100, setpoint = 90.0, objective_threshold_ms = 2500.0))]
fn evaluate<'py>(
    py: Python<'py>,
    samples: Vec<f64>,
    dt_ms: u64,
    setpoint: f64,
    objective_threshold_ms: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let trace = ExperimentTrace::new(dt_ms, setpoint, samples).map_err(to_py_err)?;
    evaluation_dict(py, &trace, objective_threshold_ms)
}

/// Trial configs for a TOML workbench config (defaults when omitted).
#[pyfunction]
#[pyo3(signature = (config_toml = None))]
fn generate_configs<'py>(py: Python<'py>, config_toml: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let config = load_config(config_toml)?;
    config.validate().map_err(to_py_err)?;
    to_python(py, &config.generate())
}

/// Run trial configs (as produced by `generate_configs`) on the default
/// or configured plants.
#[pyfunction]
#[pyo3(signature = (configs, parallelism = 1, config_toml = None))]
fn run_batch<'py>(
    py: Python<'py>,
    configs: &Bound<'py, PyAny>,
    parallelism: usize,
    config_toml: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let configs: Vec<TrialConfig> = from_python(configs)?;
    let registry = load_config(config_toml)?.registry();
    let results = py.detach(|| trials::run_batch(&configs, &registry, parallelism));
    to_python(py, &results)
}

/// Tune one robot from one initial state and return the trial result.
#[pyfunction]
#[pyo3(signature = (optimizer, robot, initial_gains, eec = 0, seed = 0, budget = 150))]
fn tune<'py>(
    py: Python<'py>,
    optimizer: &str,
    robot: &str,
    initial_gains: PyGainVector,
    eec: u32,
    seed: u64,
    budget: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let level = EecLevel::defaults()
        .into_iter()
        .find(|l| l.id == eec)
        .ok_or_else(|| PyValueError::new_err(format!("unknown level {eec}")))?;
    let state = InitialState { id: 0, label: "python".into(), gains: initial_gains.0 };
    let settings = TrialSettings { budget, ..TrialSettings::default() };
    let config = trials::generate_configs(
        &[level],
        &[state],
        &[parse_optimizer(optimizer)?],
        &[parse_robot(robot)?],
        &[seed],
        &settings,
    )
    .remove(0);
    let registry = trials::default_registry();
    let result = py.detach(|| trials::execute_trial(&config, &registry));
    to_python(py, &result)
}

/// Convergence summary rows, one per (robot, level, initial state, optimizer).
#[pyfunction]
fn summarize<'py>(py: Python<'py>, results: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let results: Vec<TrialResult> = from_python(results)?;
    to_python(py, &report::summarize(&results))
}

/// Gaussian KDE; Silverman bandwidth unless one is given.
#[pyfunction]
#[pyo3(signature = (samples, bandwidth = None))]
fn kde<'py>(py: Python<'py>, samples: Vec<f64>, bandwidth: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let bw = bandwidth.map_or(Bandwidth::Auto, Bandwidth::Fixed);
    to_python(py, &report::kde(&samples, bw).map_err(to_py_err)?)
}

#[pymodule]
fn pidtune_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGainVector>()?;
    m.add_class::<PyPlantParams>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_configs, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add_function(wrap_pyfunction!(tune, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(kde, m)?)?;
    Ok(())
}
