//! Python bindings for the fracwave core: configs, runs, and the scalar
//! fractional-derivative utilities.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fracwave::analysis::{fit_decay, identity_residual, EnergyRecord};
use fracwave::cli::{preset_config, PRESET_NAMES};
use fracwave::fractional::{caputo_convolution_oracle, diffusive_scalar_driver};
use fracwave::model::{config_to_text, parse_config, read_config, validate, QuadratureGrid, SimConfig};
use fracwave::stepper::{run, NullObserver};

fn value_err(message: impl Into<String>) -> PyErr {
    PyValueError::new_err(message.into())
}

fn check_fractional_args(alpha: f64, eta: f64, dt: f64) -> PyResult<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(value_err(format!("alpha = {alpha} violates: 0 < alpha < 1")));
    }
    if eta < 0.0 || eta.is_nan() {
        return Err(value_err(format!("eta = {eta} violates: eta >= 0")));
    }
    if dt <= 0.0 || dt.is_nan() {
        return Err(value_err(format!("dt = {dt} violates: dt > 0")));
    }
    Ok(())
}

/// A simulation configuration, held in the same key = value form the CLI
/// reads. Build one from a preset, a file, or literal text, tweak keys with
/// `set`, then call `run`.
#[pyclass(module = "fracwave")]
#[derive(Clone)]
struct Config {
    inner: SimConfig,
}

#[pymethods]
impl Config {
    /// One of the named presets: example1, example1_desk, example2,
    /// example2_desk.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Config> {
        let inner = preset_config(name).map_err(|e| value_err(e.to_string()))?;
        Ok(Config { inner })
    }

    /// Parse a config file from disk.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Config> {
        let inner =
            read_config(std::path::Path::new(path)).map_err(|e| value_err(e.to_string()))?;
        Ok(Config { inner })
    }

    /// Parse config text directly.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Config> {
        let inner = parse_config(text, None).map_err(|e| value_err(e.to_string()))?;
        Ok(Config { inner })
    }

    /// Replace one key, e.g. `config.set("time.N", "2000")`. Unknown keys and
    /// unparseable values raise ValueError.
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        let current = config_to_text(&self.inner).map_err(PyRuntimeError::new_err)?;
        let mut lines: Vec<&str> = current
            .lines()
            .filter(|line| {
                line.split_once('=')
                    .map_or(true, |(existing, _)| existing.trim() != key)
            })
            .collect();
        let appended = format!("{key} = {value}");
        lines.push(&appended);
        let text = lines.join("\n");
        self.inner = parse_config(&text, None).map_err(|e| value_err(e.to_string()))?;
        Ok(())
    }

    /// The config in its file form.
    fn to_text(&self) -> PyResult<String> {
        config_to_text(&self.inner).map_err(PyRuntimeError::new_err)
    }

    /// Raise ValueError listing every parameter constraint violation.
    fn validate(&self) -> PyResult<()> {
        validate(&self.inner).map_err(|e| value_err(e.to_string()))
    }

    /// Run the simulation and return the trajectory summary. Releases the
    /// interpreter lock for the duration of the run.
    fn run(&self, py: Python<'_>) -> PyResult<RunResult> {
        validate(&self.inner).map_err(|e| value_err(e.to_string()))?;
        let config = self.inner.clone();
        let summary = py
            .allow_threads(move || run(&config, &mut NullObserver))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;

        let grid = self.inner.spatial_grid();
        let records = summary.energy;
        Ok(RunResult {
            n: records.iter().map(|r| r.n).collect(),
            t: records.iter().map(|r| r.t).collect(),
            e_raw: records.iter().map(|r| r.e_raw).collect(),
            e_phys: records.iter().map(|r| r.e_phys).collect(),
            d: records.iter().map(|r| r.d).collect(),
            residual: records.iter().map(|r| r.residual).collect(),
            x: grid.node_positions(),
            u: summary.final_state.u,
            v: summary.final_state.v,
            records,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(J={}, N={}, T={}, alpha={}, eta={})",
            self.inner.space.half_count,
            self.inner.time.steps,
            self.inner.time.t_final,
            self.inner.fractional.alpha,
            self.inner.fractional.eta
        )
    }
}

/// Energy history plus the final field of one simulation run. Column lists
/// share indexing: entry i of `n`, `t`, `e_raw`, `e_phys`, `d`, `residual`
/// describe the same recorded step; `x`, `u`, `v` give the final snapshot.
#[pyclass(module = "fracwave")]
struct RunResult {
    #[pyo3(get)]
    n: Vec<usize>,
    #[pyo3(get)]
    t: Vec<f64>,
    #[pyo3(get)]
    e_raw: Vec<f64>,
    #[pyo3(get)]
    e_phys: Vec<f64>,
    #[pyo3(get)]
    d: Vec<f64>,
    #[pyo3(get)]
    residual: Vec<f64>,
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    u: Vec<f64>,
    #[pyo3(get)]
    v: Vec<f64>,
    records: Vec<EnergyRecord>,
}

#[pymethods]
impl RunResult {
    /// Least-squares power-law fit of E_raw(t) over [t_lo, t_hi]; returns
    /// (slope, C, rms) for E ~ C * t^slope.
    fn fit_decay(&self, t_lo: f64, t_hi: f64) -> PyResult<(f64, f64, f64)> {
        let fit = fit_decay(&self.records, (t_lo, t_hi)).map_err(|e| value_err(e.to_string()))?;
        Ok((fit.slope, fit.c, fit.rms))
    }

    /// Largest per-step energy identity residual, relative to the initial
    /// energy.
    fn identity_residual(&self) -> f64 {
        identity_residual(&self.records)
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult({} records, {} nodes)",
            self.records.len(),
            self.x.len()
        )
    }
}

/// Generalized Caputo derivative of a sampled function at its last sample,
/// via the exact piecewise-linear convolution.
#[pyfunction]
fn caputo_derivative(samples: Vec<f64>, alpha: f64, eta: f64, dt: f64) -> PyResult<f64> {
    check_fractional_args(alpha, eta, dt)?;
    caputo_convolution_oracle(&samples, alpha, eta, dt).map_err(|e| value_err(e.to_string()))
}

/// Time series of the diffusive realization of the fractional derivative,
/// driven by the sampled derivative `f_dot` with a fresh mode bank of the
/// given quadrature size.
#[pyfunction]
fn diffusive_force_series(
    f_dot: Vec<f64>,
    alpha: f64,
    eta: f64,
    radius: f64,
    modes: usize,
    dt: f64,
) -> PyResult<Vec<f64>> {
    check_fractional_args(alpha, eta, dt)?;
    if radius <= 0.0 || radius.is_nan() {
        return Err(value_err(format!("radius = {radius} violates: radius > 0")));
    }
    if modes == 0 {
        return Err(value_err("modes = 0 violates: modes >= 1"));
    }
    let quad = QuadratureGrid::build(radius, modes, alpha, eta);
    Ok(diffusive_scalar_driver(&f_dot, &quad, dt))
}

/// Names accepted by Config.preset.
#[pyfunction]
fn preset_names() -> Vec<String> {
    PRESET_NAMES.iter().map(|s| s.to_string()).collect()
}

#[pymodule(name = "fracwave")]
fn fracwave_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<RunResult>()?;
    m.add_function(wrap_pyfunction!(caputo_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(diffusive_force_series, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    Ok(())
}
