//! Python bindings for the `fwmlab` crate.
//!
//! Lengths are in metres and powers in watts, except where the argument name
//! says `_nm`. Tabular results come back as dicts of lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString};

use fwmlab_core::consts::NM;
use fwmlab_core::coupled_mode;
use fwmlab_core::detection::{self, DetectorSpec};
use fwmlab_core::harness;
use fwmlab_core::wavelength;
use fwmlab_core::{PolarizationCase, ScenarioConfig};

fn err(e: fwmlab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn case_of(s: &str) -> PyResult<PolarizationCase> {
    s.parse().map_err(err)
}

fn to_toml(v: &Bound<'_, PyAny>) -> PyResult<toml::Value> {
    if v.is_instance_of::<PyBool>() {
        Ok(toml::Value::Boolean(v.extract()?))
    } else if v.is_instance_of::<PyInt>() {
        Ok(toml::Value::Integer(v.extract()?))
    } else if v.is_instance_of::<PyFloat>() {
        Ok(toml::Value::Float(v.extract()?))
    } else if v.is_instance_of::<PyString>() {
        Ok(toml::Value::String(v.extract()?))
    } else {
        Err(PyValueError::new_err(
            "config values must be bool, int, float or str",
        ))
    }
}

fn from_toml<'py>(py: Python<'py>, v: &toml::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        toml::Value::Boolean(b) => PyBool::new(py, *b).to_owned().into_any(),
        toml::Value::Integer(i) => i.into_pyobject(py)?.into_any(),
        toml::Value::Float(f) => f.into_pyobject(py)?.into_any(),
        other => other
            .to_string()
            .trim_matches('"')
            .into_pyobject(py)?
            .into_any(),
    })
}

/// Scenario configuration with the reference lab defaults.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        PyConfig {
            inner: ScenarioConfig::default(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyConfig {
            inner: ScenarioConfig::from_toml_str(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyConfig {
            inner: ScenarioConfig::from_file(&path).map_err(err)?,
        })
    }

    /// Set one dotted key, e.g. `cfg.set("fiber.length_m", 200.0)`.
    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.set(key, &to_toml(value)?).map_err(err)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.inner.entries() {
            d.set_item(k, from_toml(py, &v)?)?;
        }
        Ok(d)
    }

    #[getter]
    fn case(&self) -> String {
        self.inner.case.to_string()
    }

    #[setter]
    fn set_case(&mut self, case: &str) -> PyResult<()> {
        self.inner.case = case_of(case)?;
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(case={}, n_runs={})",
            self.inner.case, self.inner.n_runs
        )
    }
}

fn config_or_default(cfg: Option<PyConfig>) -> ScenarioConfig {
    cfg.map(|c| c.inner).unwrap_or_default()
}

/// BS idler wavelength in nm.
#[pyfunction]
fn bs_idler_wavelength_nm(signal_nm: f64, p1_nm: f64, p2_nm: f64) -> PyResult<f64> {
    Ok(wavelength::bs_idler_wavelength(signal_nm * NM, p1_nm * NM, p2_nm * NM).map_err(err)? / NM)
}

/// Degenerate-FWM idler wavelength in nm.
#[pyfunction]
fn dfwm_idler_wavelength_nm(signal_nm: f64, pump_nm: f64) -> PyResult<f64> {
    Ok(wavelength::dfwm_idler_wavelength(signal_nm * NM, pump_nm * NM).map_err(err)? / NM)
}

/// Coupled-mode BS efficiency.
#[pyfunction]
#[pyo3(signature = (p1, p2, gamma, length, delta_beta = 0.0, case = "A"))]
fn bs_efficiency(
    p1: f64,
    p2: f64,
    gamma: f64,
    length: f64,
    delta_beta: f64,
    case: &str,
) -> PyResult<f64> {
    Ok(coupled_mode::bs_efficiency(
        p1,
        p2,
        gamma,
        length,
        delta_beta,
        case_of(case)?,
    ))
}

/// Mean photons per gate for an optical power at a wavelength (nm).
#[pyfunction]
#[pyo3(signature = (power, wavelength_nm, gate = 2.5e-9))]
fn mean_photons_per_gate(power: f64, wavelength_nm: f64, gate: f64) -> f64 {
    detection::mean_photons_per_gate(power, wavelength_nm * NM, gate)
}

/// Detector clicks per second for a mean photon number per gate.
#[pyfunction]
#[pyo3(signature = (mu, efficiency = 0.10, dark_prob_per_ns = 2.7e-6, gate = 2.5e-9, trigger_rate = 1e5))]
fn counts_per_second(
    mu: f64,
    efficiency: f64,
    dark_prob_per_ns: f64,
    gate: f64,
    trigger_rate: f64,
) -> PyResult<f64> {
    let det = DetectorSpec {
        efficiency,
        gate,
        trigger_rate,
        dark_prob_per_ns,
    };
    det.validate().map_err(err)?;
    Ok(detection::counts_per_second(
        detection::click_probability(mu, &det),
        &det,
    ))
}

/// Coupled-mode efficiency versus signal wavelength.
#[pyfunction]
#[pyo3(signature = (signal_nm, config = None))]
fn bs_sweep<'py>(
    py: Python<'py>,
    signal_nm: Vec<f64>,
    config: Option<PyConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config_or_default(config);
    let wls: Vec<f64> = signal_nm.iter().map(|l| l * NM).collect();
    let rows = harness::run_bs_sweep(&cfg, &wls, cfg.case).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item(
        "lambda_s_nm",
        rows.iter().map(|r| r.lambda_s / NM).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "lambda_i_nm",
        rows.iter().map(|r| r.lambda_i / NM).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "delta_beta_per_m",
        rows.iter().map(|r| r.delta_beta).collect::<Vec<_>>(),
    )?;
    d.set_item("eta", rows.iter().map(|r| r.eta).collect::<Vec<_>>())?;
    d.set_item("eta_db", rows.iter().map(|r| r.eta_db).collect::<Vec<_>>())?;
    Ok(d)
}

/// Parallel and perpendicular Raman gain coefficients around one pump.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn raman_scan<'py>(py: Python<'py>, config: Option<PyConfig>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config_or_default(config);
    let curve = harness::run_raman_scan(&cfg).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item(
        "detuning_thz",
        curve
            .detuning_hz
            .iter()
            .map(|f| f / 1e12)
            .collect::<Vec<_>>(),
    )?;
    d.set_item("r_parallel", curve.r_parallel.clone())?;
    d.set_item("r_perpendicular", curve.r_perpendicular.clone())?;
    d.set_item("ratio", curve.depolarization_ratio())?;
    Ok(d)
}

/// Gated counts for both channels under the four toggle conditions.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn counts<'py>(py: Python<'py>, config: Option<PyConfig>) -> PyResult<Bound<'py, PyList>> {
    let cfg = config_or_default(config);
    let report = py
        .detach(|| harness::run_counting_experiment(&cfg))
        .map_err(err)?;
    let out = PyList::empty(py);
    for row in &report.rows {
        let d = PyDict::new(py);
        d.set_item("channel", row.channel.label())?;
        d.set_item("condition", row.condition.label())?;
        d.set_item("case", row.case.to_string())?;
        d.set_item("mu_per_gate", row.mu_per_gate)?;
        d.set_item("clicks_per_s", row.clicks_per_s)?;
        d.set_item("converted", row.decomposition.converted)?;
        d.set_item("raman_noise", row.decomposition.raman_noise)?;
        d.set_item("leakage", row.decomposition.leakage)?;
        d.set_item("dark", row.decomposition.dark)?;
        out.append(d)?;
    }
    Ok(out)
}

/// Ensemble-averaged output spectrum from the split-step solver.
#[pyfunction]
#[pyo3(signature = (config = None, runs = None))]
fn spectrum<'py>(
    py: Python<'py>,
    config: Option<PyConfig>,
    runs: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = config_or_default(config);
    if let Some(n) = runs {
        cfg.n_runs = n;
    }
    let report = py
        .detach(|| harness::run_spectrum_experiment(&cfg))
        .map_err(err)?;
    let s = &report.spectrum;
    let d = PyDict::new(py);
    d.set_item("frequency_offset_hz", s.frequency_offsets.clone())?;
    d.set_item(
        "lambda_nm",
        (0..s.psd_total.len())
            .map(|i| s.wavelength_of(i) / NM)
            .collect::<Vec<_>>(),
    )?;
    d.set_item("psd_total", s.psd_total.clone())?;
    d.set_item("psd_x", s.psd_x.clone())?;
    d.set_item("psd_y", s.psd_y.clone())?;
    d.set_item("n_runs", s.n_runs)?;
    let markers = PyDict::new(py);
    for m in &report.markers {
        markers.set_item(&m.name, m.band_power)?;
    }
    d.set_item("markers", markers)?;
    d.set_item("seeds", report.seeds.clone())?;
    Ok(d)
}

#[pymodule]
fn fwmlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(bs_idler_wavelength_nm, m)?)?;
    m.add_function(wrap_pyfunction!(dfwm_idler_wavelength_nm, m)?)?;
    m.add_function(wrap_pyfunction!(bs_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(mean_photons_per_gate, m)?)?;
    m.add_function(wrap_pyfunction!(counts_per_second, m)?)?;
    m.add_function(wrap_pyfunction!(bs_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(raman_scan, m)?)?;
    m.add_function(wrap_pyfunction!(counts, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
