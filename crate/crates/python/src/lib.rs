//! Python bindings for `deco_metrix`.
//!
//! ```python
//! import deco_metrix_py as dm
//! env = dm.Environment(dm.Spectrum.from_markov_rate(1.0, 1e-3),
//!                      dm.Spectrum.from_markov_rate(0.2, 1e-3))
//! task = dm.Task("markov_collective_rate", 1.0, dm.Probe(4), env)
//! task.optimize()
//! ```

use deco_metrix::oracle::{oracle_probability as oracle_p, DEFAULT_TOLERANCE};
use deco_metrix::scaling::{self, ScalingCurve, ScalingPoint, ScenarioParams};
use deco_metrix::{
    EstimationTask, LorentzianSpectrum, NoiseEnvironment, ProbeConfig, SpectralLimit, StateFamily,
    Target,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(deco_metrix_py, DecoMetrixError, PyValueError, "Raised on invalid input or a failed computation; `args[0]` is the error kind.");

fn err(e: deco_metrix::Error) -> PyErr {
    DecoMetrixError::new_err((e.kind(), e.to_string()))
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for deco_metrix::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn parse_target(name: &str) -> PyResult<Target> {
    Ok(match name {
        "markov_collective_rate" => Target::MarkovCollectiveRate,
        "nonmarkov_collective_rate" => Target::NonMarkovCollectiveRate,
        "qubit_frequency" => Target::QubitFrequency,
        _ => {
            return Err(PyValueError::new_err(format!(
                "unknown target {name:?}; use markov_collective_rate, nonmarkov_collective_rate or qubit_frequency"
            )))
        }
    })
}

fn parse_family(name: &str) -> PyResult<StateFamily> {
    match name {
        "ghz" => Ok(StateFamily::Ghz),
        "product" => Ok(StateFamily::Product),
        _ => Err(PyValueError::new_err(format!("unknown family {name:?}; use ghz or product"))),
    }
}

/// Spectral model of a dephasing bath.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Spectrum(SpectralLimit);

#[pymethods]
impl Spectrum {
    #[staticmethod]
    fn lorentzian(amplitude: f64, correlation_time: f64) -> PyResult<Self> {
        Ok(Self(LorentzianSpectrum::new(amplitude, correlation_time).py()?.into()))
    }

    /// Lorentzian with Markov rate `2 a τc` equal to `markov_rate`.
    #[staticmethod]
    fn from_markov_rate(markov_rate: f64, correlation_time: f64) -> PyResult<Self> {
        Ok(Self(
            LorentzianSpectrum::from_markov_rate(markov_rate, correlation_time).py()?.into(),
        ))
    }

    #[staticmethod]
    fn white(markov_rate: f64) -> PyResult<Self> {
        Ok(Self(SpectralLimit::white(markov_rate).py()?))
    }

    #[staticmethod]
    #[pyo3(name = "static")]
    fn static_noise(amplitude: f64) -> PyResult<Self> {
        Ok(Self(SpectralLimit::static_noise(amplitude).py()?))
    }

    #[staticmethod]
    fn from_nonmarkov_rate(nonmarkov_rate: f64) -> PyResult<Self> {
        Ok(Self(SpectralLimit::from_nonmarkov_rate(nonmarkov_rate).py()?))
    }

    #[staticmethod]
    fn quiet() -> Self {
        Self(SpectralLimit::quiet())
    }

    #[getter]
    fn label(&self) -> &'static str {
        self.0.label()
    }

    #[getter]
    fn markov_rate(&self) -> Option<f64> {
        self.0.markov_rate()
    }

    #[getter]
    fn nonmarkov_rate(&self) -> Option<f64> {
        self.0.nonmarkov_rate()
    }

    /// Decoherence exponent `Φ(t)`.
    fn exponent(&self, t: f64) -> PyResult<f64> {
        self.0.exponent(t).py()
    }

    /// Time-dependent rate `Φ(t)/t`.
    fn rate_at(&self, t: f64) -> PyResult<f64> {
        self.0.rate_at(t).py()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum({:?})", self.0)
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Probe(ProbeConfig);

#[pymethods]
impl Probe {
    #[new]
    #[pyo3(signature = (qubits, family = "ghz", qubit_frequency = 0.0, readout_phase = 0.0))]
    fn new(qubits: u32, family: &str, qubit_frequency: f64, readout_phase: f64) -> PyResult<Self> {
        Ok(Self(
            ProbeConfig::new(qubits, parse_family(family)?, qubit_frequency, readout_phase).py()?,
        ))
    }

    #[getter]
    fn qubits(&self) -> u32 {
        self.0.num_qubits()
    }

    #[getter]
    fn family(&self) -> &'static str {
        match self.0.family() {
            StateFamily::Ghz => "ghz",
            StateFamily::Product => "product",
        }
    }

    #[getter]
    fn qubit_frequency(&self) -> f64 {
        self.0.qubit_frequency()
    }

    #[getter]
    fn readout_phase(&self) -> f64 {
        self.0.readout_phase()
    }

    fn __repr__(&self) -> String {
        format!(
            "Probe(qubits={}, family={:?}, qubit_frequency={}, readout_phase={})",
            self.qubits(),
            self.family(),
            self.qubit_frequency(),
            self.readout_phase()
        )
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Environment(NoiseEnvironment);

#[pymethods]
impl Environment {
    #[new]
    #[pyo3(signature = (collective, local = None))]
    fn new(collective: Spectrum, local: Option<Spectrum>) -> Self {
        Self(NoiseEnvironment::new(
            collective.0,
            local.map_or(SpectralLimit::quiet(), |s| s.0),
        ))
    }

    #[getter]
    fn collective(&self) -> Spectrum {
        Spectrum(self.0.collective)
    }

    #[getter]
    fn local(&self) -> Spectrum {
        Spectrum(self.0.local)
    }
}

fn point_dict<'py>(py: Python<'py>, p: &ScalingPoint) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("L", p.qubits)?;
    d.set_item("t_opt", p.t_opt)?;
    d.set_item("delta_min", p.delta_min)?;
    Ok(d)
}

fn fit_dict<'py>(py: Python<'py>, f: &deco_metrix::ExponentFit) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("slope", f.slope)?;
    d.set_item("intercept", f.intercept)?;
    d.set_item("residual", f.residual)?;
    d.set_item("points", f.points)?;
    d.set_item("window", f.window)?;
    Ok(d)
}

/// Estimation of one parameter over a total time `T`.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Task(EstimationTask);

#[pymethods]
impl Task {
    #[new]
    fn new(target: &str, total_time: f64, probe: Probe, env: Environment) -> PyResult<Self> {
        Ok(Self(
            EstimationTask::new(parse_target(target)?, total_time, probe.0, env.0).py()?,
        ))
    }

    #[getter]
    fn true_value(&self) -> PyResult<f64> {
        self.0.true_value().py()
    }

    #[getter]
    fn default_bounds(&self) -> (f64, f64) {
        self.0.default_bounds()
    }

    fn with_qubits(&self, qubits: u32) -> PyResult<Self> {
        Ok(Self(self.0.with_num_qubits(qubits).py()?))
    }

    fn with_total_time(&self, total_time: f64) -> PyResult<Self> {
        Ok(Self(self.0.with_total_time(total_time).py()?))
    }

    /// Error-propagation uncertainty at interrogation time `t`.
    fn uncertainty(&self, t: f64) -> PyResult<f64> {
        deco_metrix::uncertainty(&self.0, t).py()
    }

    /// Dict with `t_opt_s`, `delta_min`, `repetitions`.
    #[pyo3(signature = (bounds = None))]
    fn optimize<'py>(&self, py: Python<'py>, bounds: Option<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
        let best = py
            .detach(|| deco_metrix::optimize_time(&self.0, bounds.unwrap_or(self.0.default_bounds())))
            .py()?;
        let d = PyDict::new(py);
        d.set_item("t_opt_s", best.t_opt)?;
        d.set_item("delta_min", best.delta_min)?;
        d.set_item("repetitions", best.repetitions)?;
        Ok(d)
    }

    /// Monte Carlo RMSE of the maximum-likelihood estimate against the formula.
    #[pyo3(signature = (t, trials = 1000, seed = 20_190_318))]
    fn mc<'py>(&self, py: Python<'py>, t: f64, trials: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let r = py.detach(|| deco_metrix::mc_validate(&self.0, t, trials, seed)).py()?;
        let d = PyDict::new(py);
        d.set_item("N", r.repetitions)?;
        d.set_item("trials", r.trials)?;
        d.set_item("rmse", r.rmse)?;
        d.set_item("delta_formula", r.delta_formula)?;
        d.set_item("ratio", r.ratio)?;
        d.set_item("clipped", r.clipped)?;
        Ok(d)
    }

    /// Optimal point at each qubit number, as a list of dicts.
    fn sweep<'py>(&self, py: Python<'py>, qubits: Vec<u32>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let curve = py.detach(|| scaling::sweep(&self.0, &qubits)).py()?;
        curve.points.iter().map(|p| point_dict(py, p)).collect()
    }
}

#[pyfunction]
fn survival_probability(probe: Probe, env: Environment, t: f64) -> PyResult<f64> {
    deco_metrix::survival_probability(&probe.0, &env.0, t).py()
}

/// `(magnitude, phase)` of the GHZ coherence.
#[pyfunction]
fn ghz_coherence(probe: Probe, env: Environment, t: f64) -> PyResult<(f64, f64)> {
    let c = deco_metrix::ghz_coherence(&probe.0, &env.0, t).py()?;
    Ok((c.magnitude, c.phase))
}

/// Readout probability from integrating the master equation (up to 6 qubits).
#[pyfunction]
#[pyo3(signature = (probe, env, t, tol = DEFAULT_TOLERANCE))]
fn oracle_probability(py: Python<'_>, probe: Probe, env: Environment, t: f64, tol: f64) -> PyResult<f64> {
    py.detach(|| oracle_p(&probe.0, &env.0, t, tol)).py()
}

#[pyfunction]
fn default_grid() -> Vec<u32> {
    scaling::default_grid()
}

/// Log-log least-squares slope of `deltas` against `qubits` inside `window`.
#[pyfunction]
fn fit_exponent<'py>(
    py: Python<'py>,
    qubits: Vec<u32>,
    deltas: Vec<f64>,
    window: (f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    if qubits.len() != deltas.len() {
        return Err(PyValueError::new_err("qubits and deltas differ in length"));
    }
    let scenario = EstimationTask::new(
        Target::QubitFrequency,
        1.0,
        ProbeConfig::ghz(1, 0.0).py()?,
        NoiseEnvironment::default(),
    )
    .py()?;
    let curve = ScalingCurve {
        points: qubits
            .iter()
            .zip(&deltas)
            .map(|(&l, &d)| ScalingPoint {
                qubits: l,
                t_opt: f64::NAN,
                delta_min: d,
            })
            .collect(),
        scenario,
    };
    fit_dict(py, &scaling::fit_exponent(&curve, window).py()?)
}

/// Columns of the GHZ-versus-separable figure, keyed like `fig1.csv`.
#[pyfunction]
#[pyo3(signature = (qubits = None))]
fn figure<'py>(py: Python<'py>, qubits: Option<Vec<u32>>) -> PyResult<Bound<'py, PyDict>> {
    let qubits = qubits.unwrap_or_else(scaling::default_grid);
    let data = py
        .detach(|| scaling::figure(&ScenarioParams::default(), &qubits))
        .py()?;
    let d = PyDict::new(py);
    d.set_item("L", data.rows.iter().map(|r| r.qubits).collect::<Vec<_>>())?;
    d.set_item("t_opt", data.rows.iter().map(|r| r.t_opt).collect::<Vec<_>>())?;
    d.set_item("delta_ghz", data.rows.iter().map(|r| r.delta_ghz).collect::<Vec<_>>())?;
    d.set_item("delta_separable", data.rows.iter().map(|r| r.delta_separable).collect::<Vec<_>>())?;
    d.set_item("hl_guide", data.rows.iter().map(|r| r.hl_guide).collect::<Vec<_>>())?;
    d.set_item("sql_guide", data.rows.iter().map(|r| r.sql_guide).collect::<Vec<_>>())?;
    Ok(d)
}

/// The 2×2 table of asymptotic exponents.
#[pyfunction]
#[pyo3(signature = (qubits = None, window = (1e3, 1e4)))]
fn table<'py>(py: Python<'py>, qubits: Option<Vec<u32>>, window: (f64, f64)) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let qubits = qubits.unwrap_or_else(scaling::default_grid);
    let cells = py
        .detach(|| scaling::table(&ScenarioParams::default(), &qubits, window))
        .py()?;
    cells
        .iter()
        .map(|c| {
            let d = fit_dict(py, &c.fit)?;
            d.set_item("fields", c.fields.name())?;
            d.set_item("environment", c.environment.name())?;
            d.set_item("target", c.target.name())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
pub fn deco_metrix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DecoMetrixError", m.py().get_type::<DecoMetrixError>())?;
    m.add_class::<Spectrum>()?;
    m.add_class::<Probe>()?;
    m.add_class::<Environment>()?;
    m.add_class::<Task>()?;
    m.add_function(wrap_pyfunction!(survival_probability, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_probability, m)?)?;
    m.add_function(wrap_pyfunction!(default_grid, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(figure, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    Ok(())
}
