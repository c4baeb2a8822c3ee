//! Python bindings for the `nhqc` simulator.

use ::nhqc::bench::{self, EvalOptions, FidelityMetric, GateReport, SweepAxis};
use ::nhqc::cli::parse_gate;
use ::nhqc::dynamics;
use ::nhqc::error::NhqcError;
use ::nhqc::holonomy;
use ::nhqc::numkit::{C64, ComplexMatrix};
use ::nhqc::schemes::build_schedule;
use ::nhqc::system;
use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: NhqcError) -> PyErr {
    match err {
        NhqcError::UnknownScheme(_) | NhqcError::InvalidParameter(_) | NhqcError::InvalidGrid(_) => {
            PyValueError::new_err(err.to_string())
        }
        NhqcError::Io(_) | NhqcError::Golden(_) => PyOSError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    let d = m.dim();
    (0..d).map(|i| (0..d).map(|j| m.get(i, j)).collect::<Vec<C64>>()).collect()
}

/// Gate rotation `exp(-i gamma/2 n.sigma)` described by `(gamma, theta, phi)`.
#[pyclass(name = "GateAngles", module = "nhqc", frozen, from_py_object)]
#[derive(Clone)]
struct PyGateAngles {
    inner: system::GateAngles,
}

#[pymethods]
impl PyGateAngles {
    #[new]
    fn new(gamma: f64, theta: f64, phi: f64) -> PyResult<Self> {
        Ok(Self { inner: system::GateAngles::new(gamma, theta, phi).map_err(to_py)? })
    }

    /// Parses `S`, `T`, `sqrtH`, `NOT`, `H` or `custom:gamma,theta,phi`.
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_gate(name).map_err(to_py)? })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }

    /// Target 2x2 matrix as nested lists of complex numbers.
    fn target(&self) -> Vec<Vec<Complex64>> {
        rows(&self.inner.target())
    }

    fn __repr__(&self) -> String {
        format!("GateAngles(gamma={}, theta={}, phi={})", self.inner.gamma, self.inner.theta, self.inner.phi)
    }
}

/// Rabi error, detuning error and decoherence rates in units of `Omega_bar`.
#[pyclass(name = "ErrorModel", module = "nhqc", frozen, from_py_object)]
#[derive(Clone)]
struct PyErrorModel {
    inner: system::ErrorModel,
}

#[pymethods]
impl PyErrorModel {
    #[new]
    #[pyo3(signature = (epsilon=0.0, eta=0.0, gamma_minus=0.0, gamma_z=0.0))]
    fn new(epsilon: f64, eta: f64, gamma_minus: f64, gamma_z: f64) -> PyResult<Self> {
        Ok(Self { inner: system::ErrorModel::new(epsilon, eta, gamma_minus, gamma_z).map_err(to_py)? })
    }

    /// Builds the model from physical rates (rad/s) and a reference Rabi rate.
    #[staticmethod]
    #[pyo3(signature = (epsilon, eta, gamma_minus, gamma_z, omega_bar=system::OMEGA_BAR_PHYSICAL))]
    fn physical(epsilon: f64, eta: f64, gamma_minus: f64, gamma_z: f64, omega_bar: f64) -> PyResult<Self> {
        Ok(Self {
            inner: system::ErrorModel::from_physical(epsilon, eta, gamma_minus, gamma_z, omega_bar).map_err(to_py)?,
        })
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn gamma_minus(&self) -> f64 {
        self.inner.gamma_minus
    }

    #[getter]
    fn gamma_z(&self) -> f64 {
        self.inner.gamma_z
    }

    fn is_closed(&self) -> bool {
        self.inner.is_closed()
    }

    fn __repr__(&self) -> String {
        let e = &self.inner;
        format!("ErrorModel(epsilon={}, eta={}, gamma_minus={}, gamma_z={})", e.epsilon, e.eta, e.gamma_minus, e.gamma_z)
    }
}

/// One scheme with its gate and knobs.
#[pyclass(name = "Scheme", module = "nhqc", frozen, from_py_object)]
#[derive(Clone)]
struct PyScheme {
    inner: system::SchemeSpec,
}

#[pymethods]
impl PyScheme {
    #[new]
    #[pyo3(signature = (tag, gate=None, loops=None, varsigma=None))]
    fn new(tag: &str, gate: Option<PyGateAngles>, loops: Option<usize>, varsigma: Option<f64>) -> PyResult<Self> {
        let kind = system::SchemeKind::from_tag(tag).map_err(to_py)?;
        let angles = gate.map(|g| g.inner).unwrap_or_else(system::GateAngles::s_gate);
        let mut spec = system::SchemeSpec::new(kind, angles);
        if let Some(n) = loops {
            spec = spec.with_loops(n);
        } else if matches!(kind, system::SchemeKind::C | system::SchemeKind::Cdd) {
            spec = spec.with_loops(2);
        }
        if let Some(v) = varsigma {
            spec = spec.with_varsigma(v);
        }
        spec.validate().map_err(to_py)?;
        Ok(Self { inner: spec })
    }

    #[getter]
    fn tag(&self) -> &'static str {
        self.inner.scheme.tag()
    }

    #[getter]
    fn label(&self) -> &'static str {
        self.inner.scheme.label()
    }

    /// Total duration of the pulse schedule in `1/Omega_bar`.
    fn duration(&self) -> PyResult<f64> {
        Ok(build_schedule(&self.inner).map_err(to_py)?.total_duration())
    }

    /// Pulse area in multiples of `pi`.
    fn pulse_area(&self) -> PyResult<f64> {
        bench::pulse_area(&build_schedule(&self.inner).map_err(to_py)?).map_err(to_py)
    }

    /// Final propagator of the full level system.
    #[pyo3(signature = (errors=None, samples=dynamics::DEFAULT_UNITARY_SAMPLES))]
    fn final_unitary(&self, errors: Option<PyErrorModel>, samples: usize) -> PyResult<Vec<Vec<Complex64>>> {
        let err = errors.map(|e| e.inner).unwrap_or_else(system::ErrorModel::ideal);
        let s = build_schedule(&self.inner).map_err(to_py)?;
        Ok(rows(&dynamics::final_unitary(&s, &err, samples).map_err(to_py)?))
    }

    /// Cyclic, parallel and cumulative dynamical residuals of the ideal evolution.
    #[pyo3(signature = (samples=dynamics::DEFAULT_UNITARY_SAMPLES))]
    fn residuals<'py>(&self, py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyDict>> {
        let s = build_schedule(&self.inner).map_err(to_py)?;
        let grid = holonomy::schedule_grid(&s, samples).map_err(to_py)?;
        let r = holonomy::condition_residuals(&s, &system::ErrorModel::ideal(), &grid).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("cyclic", r.cyclic)?;
        d.set_item("parallel", r.parallel)?;
        d.set_item("cumulative_dynamical", r.cumulative_dynamical)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Scheme({:?}, gate={:?})", self.inner.scheme.tag(), self.inner.angles)
    }
}

fn report_dict<'py>(py: Python<'py>, r: &GateReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("scheme", &r.scheme_label)?;
    d.set_item("fidelity", r.fidelity)?;
    d.set_item("pulse_area_pi", r.pulse_area)?;
    d.set_item("peak_excited_population", r.peak_excited_population)?;
    d.set_item("cyclic_residual", r.cyclic_residual)?;
    d.set_item("parallel_residual", r.parallel_residual)?;
    d.set_item("duration", r.duration)?;
    Ok(d)
}

fn options(metric: Option<&str>, closed: bool) -> PyResult<EvalOptions> {
    let opts = EvalOptions::default();
    Ok(match metric {
        Some(m) => opts.with_metric(FidelityMetric::from_tag(m).map_err(to_py)?),
        None if closed => opts.with_metric(FidelityMetric::TwoDesign),
        None => opts,
    })
}

/// Scores one scheme; the metric defaults to two-design for closed systems and
/// the six-axial-state Lindblad average otherwise.
#[pyfunction]
#[pyo3(signature = (scheme, errors=None, metric=None))]
fn simulate<'py>(
    py: Python<'py>,
    scheme: &PyScheme,
    errors: Option<PyErrorModel>,
    metric: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let err = errors.map(|e| e.inner).unwrap_or_else(system::ErrorModel::ideal);
    let opts = options(metric, err.is_closed())?;
    let spec = scheme.inner.clone();
    let report = py.detach(|| bench::evaluate(&spec, &err, &opts)).map_err(to_py)?;
    let d = report_dict(py, &report)?;
    d.set_item("metric", opts.metric.tag())?;
    Ok(d)
}

/// Sweeps `axis` (`epsilon`, `eta` or `decoherence`) over `range` (`"a:b:n"`).
#[pyfunction]
#[pyo3(signature = (schemes, axis, range, fixed=None, metric=None))]
fn sweep<'py>(
    py: Python<'py>,
    schemes: Vec<PyScheme>,
    axis: &str,
    range: &str,
    fixed: Option<PyErrorModel>,
    metric: Option<&str>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let axis = SweepAxis::from_tag(axis).map_err(to_py)?;
    let grid = bench::parse_range(range).map_err(to_py)?;
    let fixed = fixed.map(|e| e.inner).unwrap_or_else(system::ErrorModel::ideal);
    let opts = options(metric, false)?;
    let specs: Vec<system::SchemeSpec> = schemes.into_iter().map(|s| s.inner).collect();
    let result = py.detach(|| bench::sweep(&specs, axis, &grid, &fixed, &opts)).map_err(to_py)?;
    let mut out = vec![];
    for reports in &result.reports {
        for (x, r) in result.grid.iter().zip(reports) {
            let d = report_dict(py, r)?;
            d.set_item("x", *x)?;
            out.push(d);
        }
    }
    Ok(out)
}

/// `(label, area_pi, tabulated_pi)` for every catalog scheme.
#[pyfunction]
fn area_table() -> PyResult<Vec<(String, f64, Option<f64>)>> {
    Ok(bench::area_table().map_err(to_py)?.into_iter().map(|r| (r.label, r.area_pi, r.reference_pi)).collect())
}

/// Fits `1 - F = c2 x^2 + c4 x^4`, returning `(c2, c4, rms)`.
#[pyfunction]
fn fit_leading_order(x: Vec<f64>, fidelity: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let f = bench::fit_leading_order(&x, &fidelity).map_err(to_py)?;
    Ok((f.c2, f.c4, f.rms))
}

/// Tags of every scheme in the catalog.
#[pyfunction]
fn scheme_tags() -> Vec<&'static str> {
    system::SchemeKind::ALL.iter().map(|k| k.tag()).collect()
}

#[pymodule]
fn nhqc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGateAngles>()?;
    m.add_class::<PyErrorModel>()?;
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(area_table, m)?)?;
    m.add_function(wrap_pyfunction!(fit_leading_order, m)?)?;
    m.add_function(wrap_pyfunction!(scheme_tags, m)?)?;
    m.add("FIG13_GAMMA", bench::FIG13_GAMMA)?;
    m.add("OMEGA_BAR_PHYSICAL", system::OMEGA_BAR_PHYSICAL)?;
    Ok(())
}
