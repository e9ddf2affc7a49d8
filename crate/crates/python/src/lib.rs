//! Python bindings. Functions may be passed as a built-in name
//! (`"square"`, `"saturation:1:0"`, ...) or as any callable `float -> float`.

use std::sync::{Arc, Mutex};

use logbern_core::analysis;
use logbern_core::denoise as dn;
use logbern_core::function::builtin;
use logbern_core::suites::{run_suite as core_run_suite, Suite, SuiteConfig};
use logbern_core::warp::gamma_n;
use logbern_core::{AnalyticFunction, Error, Grid, LogApproximant, LogarithmicOperator as CoreOperator, Mu as CoreMu, WarpContext};
use pyo3::exceptions::{PyArithmeticError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numeric(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn mu_of(v: f64) -> PyResult<CoreMu> {
    CoreMu::new(v).map_err(to_py)
}

/// First exception raised by a Python callback, re-raised after the call returns.
#[derive(Clone, Default)]
struct Pending(Arc<Mutex<Option<PyErr>>>);

impl Pending {
    fn store(&self, e: PyErr) {
        let mut slot = self.0.lock().unwrap();
        if slot.is_none() {
            *slot = Some(e);
        }
    }

    fn check(&self) -> PyResult<()> {
        match self.0.lock().unwrap().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn function_arg(f: &Bound<'_, PyAny>, mu: CoreMu, pending: &Pending) -> PyResult<AnalyticFunction> {
    if let Ok(s) = f.cast::<PyString>() {
        return builtin(&s.to_cow()?, mu).map_err(to_py);
    }
    if !f.is_callable() {
        return Err(PyTypeError::new_err("expected a built-in function name or a callable"));
    }
    let name = f
        .getattr("__name__")
        .and_then(|n| n.extract::<String>())
        .unwrap_or_else(|_| "callable".into());
    let callable: Py<PyAny> = f.clone().unbind();
    let pending = pending.clone();
    Ok(AnalyticFunction::new(name, move |x| {
        Python::attach(|py| match callable.call1(py, (x,)).and_then(|v| v.extract::<f64>(py)) {
            Ok(v) => v,
            Err(e) => {
                pending.store(e);
                f64::NAN
            }
        })
    }))
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Shift parameter `mu > 0`.
#[pyclass(frozen, from_py_object, name = "Mu", module = "logbern")]
#[derive(Clone, Copy)]
struct Mu(CoreMu);

#[pymethods]
impl Mu {
    #[new]
    fn new(value: f64) -> PyResult<Self> {
        Ok(Self(mu_of(value)?))
    }

    #[getter]
    fn value(&self) -> f64 {
        self.0.get()
    }

    /// `ln(1 + mu + x)`.
    fn ln_shift(&self, x: f64) -> f64 {
        self.0.ln_shift(x)
    }

    fn __repr__(&self) -> String {
        format!("Mu({})", self.0.get())
    }
}

/// `L_n` bound to node values; call it at points of `[0, 1]`.
#[pyclass(frozen, name = "Approximant", module = "logbern")]
struct Approximant(LogApproximant);

#[pymethods]
impl Approximant {
    fn __call__(&self, x: f64) -> PyResult<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(PyValueError::new_err(format!("x = {x} is outside [0, 1]")));
        }
        Ok(self.0.eval(x))
    }

    fn eval_many(&self, py: Python<'_>, xs: Vec<f64>) -> PyResult<Vec<f64>> {
        let grid = Grid::from_nodes(xs).map_err(to_py)?;
        Ok(py.detach(|| self.0.eval_grid(&grid).values))
    }

    #[getter]
    fn node_values(&self) -> Vec<f64> {
        self.0.node_values().to_vec()
    }
}

/// The logarithmic Bernstein operator of degree `n` with shift `mu`.
#[pyclass(frozen, name = "LogarithmicOperator", module = "logbern")]
struct LogarithmicOperator(CoreOperator);

#[pymethods]
impl LogarithmicOperator {
    #[new]
    fn new(mu: f64, n: usize) -> PyResult<Self> {
        Ok(Self(CoreOperator::new(mu_of(mu)?, n).map_err(to_py)?))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu().get()
    }

    /// Samples `f` at the nodes `k/n`.
    fn apply(&self, py: Python<'_>, f: &Bound<'_, PyAny>) -> PyResult<Approximant> {
        let pending = Pending::default();
        let func = function_arg(f, self.0.mu(), &pending)?;
        let approx = py.detach(|| self.0.apply(&func));
        pending.check()?;
        Ok(Approximant(approx))
    }

    /// Uses `values[k] = f(k/n)` directly.
    fn bind(&self, values: Vec<f64>) -> PyResult<Approximant> {
        Ok(Approximant(self.0.bind(values).map_err(to_py)?))
    }

    /// The warped node `a_n(x)`.
    fn warp(&self, x: f64) -> PyResult<f64> {
        logbern_core::warp::warp(self.0.warp(), x).map_err(to_py)
    }

    /// `(x_star, gamma_n)` with `gamma_n = max_x (a_n(x) - x)`.
    fn gamma(&self) -> (f64, f64) {
        let g = gamma_n(self.0.warp());
        (g.x_star, g.gamma)
    }
}

/// `L_n f(x)`.
#[pyfunction]
fn logarithmic(py: Python<'_>, f: &Bound<'_, PyAny>, mu: f64, n: usize, x: f64) -> PyResult<f64> {
    let m = mu_of(mu)?;
    let pending = Pending::default();
    let func = function_arg(f, m, &pending)?;
    let v = py.detach(|| logbern_core::operators::logarithmic(&func, m, n, x));
    pending.check()?;
    v.map_err(to_py)
}

/// `a_n(x)`.
#[pyfunction]
fn warp(mu: f64, n: usize, x: f64) -> PyResult<f64> {
    let ctx = WarpContext::new(mu_of(mu)?, n).map_err(to_py)?;
    logbern_core::warp::warp(&ctx, x).map_err(to_py)
}

/// `gamma_n = max_x (a_n(x) - x)`.
#[pyfunction]
fn gamma(mu: f64, n: usize) -> PyResult<f64> {
    let ctx = WarpContext::new(mu_of(mu)?, n).map_err(to_py)?;
    Ok(gamma_n(&ctx).gamma)
}

/// `ln(2+mu) * omega(f_mu, 1/sqrt n) * (2 + sqrt(n) gamma_n)`.
#[pyfunction]
fn error_bound(py: Python<'_>, f: &Bound<'_, PyAny>, mu: f64, n: usize) -> PyResult<f64> {
    let m = mu_of(mu)?;
    let pending = Pending::default();
    let func = function_arg(f, m, &pending)?;
    let v = py.detach(|| analysis::error_bound(&func, m, n));
    pending.check()?;
    v.map_err(to_py)
}

/// `max over a uniform grid of |L_n f - f|`.
#[pyfunction]
#[pyo3(signature = (f, mu, n, grid_points = 1001))]
fn sup_error(py: Python<'_>, f: &Bound<'_, PyAny>, mu: f64, n: usize, grid_points: usize) -> PyResult<f64> {
    let m = mu_of(mu)?;
    let grid = Grid::uniform(grid_points).map_err(to_py)?;
    let pending = Pending::default();
    let func = function_arg(f, m, &pending)?;
    let v = py.detach(|| analysis::sup_error(&func, m, n, &grid));
    pending.check()?;
    v.map_err(to_py)
}

/// `D(f)(x)`, the limit of `n (L_n f - f)(x)`.
#[pyfunction]
fn voronovskaja_limit(py: Python<'_>, f: &Bound<'_, PyAny>, mu: f64, x: f64) -> PyResult<f64> {
    let m = mu_of(mu)?;
    let pending = Pending::default();
    let func = function_arg(f, m, &pending)?;
    let v = py.detach(|| analysis::voronovskaja_limit(&func, m, x));
    pending.check()?;
    v.map_err(to_py)
}

/// Samples `(1 + mu + k/n) f(k/n)`, `k = 0..=n`.
#[pyfunction]
fn synthesize_noisy(py: Python<'_>, f: &Bound<'_, PyAny>, mu: f64, n: usize) -> PyResult<Vec<f64>> {
    let m = mu_of(mu)?;
    let pending = Pending::default();
    let func = function_arg(f, m, &pending)?;
    let s = py.detach(|| dn::synthesize_noisy(&func, m, n));
    pending.check()?;
    Ok(s.map_err(to_py)?.samples().to_vec())
}

/// Reconstruction `exp(L_n(ln y)) / (1 + mu + x)` on a uniform grid; returns `(x, values)`.
#[pyfunction]
#[pyo3(signature = (samples, mu, grid_points = 1001))]
fn denoise(py: Python<'_>, samples: Vec<f64>, mu: f64, grid_points: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let signal = dn::NoisySignal::new(samples, mu_of(mu)?).map_err(to_py)?;
    let grid = Grid::uniform(grid_points).map_err(to_py)?;
    let r = py.detach(|| dn::denoise(&signal, &grid)).map_err(to_py)?;
    Ok((r.reconstruction.nodes, r.reconstruction.values))
}

/// A positive draw from `N(0, 0.25)` for the given seed.
#[pyfunction]
fn seeded_noise_level(seed: u64) -> PyResult<f64> {
    Ok(dn::seeded_noise_level(seed).map_err(to_py)?.get())
}

/// The six reference denoising cases as a dict.
#[pyfunction]
#[pyo3(signature = (grid_points = 1001))]
fn paper_example<'py>(py: Python<'py>, grid_points: usize) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| dn::paper_example_suite_on(grid_points)).map_err(to_py)?;
    json_to_py(py, &report)
}

/// Runs one verification suite; returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (suite, mu = 1.0, n_list = None, grid_points = 1001, function = None, seed = None))]
fn run_suite<'py>(
    py: Python<'py>,
    suite: &str,
    mu: f64,
    n_list: Option<Vec<usize>>,
    grid_points: usize,
    function: Option<&Bound<'py, PyAny>>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let s: Suite = suite.parse().map_err(to_py)?;
    let m = mu_of(mu)?;
    let pending = Pending::default();
    let mut cfg = SuiteConfig::new(m);
    cfg.n_list = n_list;
    cfg.grid_points = grid_points;
    cfg.function = function.map(|f| function_arg(f, m, &pending)).transpose()?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = py.detach(|| core_run_suite(s, &cfg));
    pending.check()?;
    json_to_py(py, &report.map_err(to_py)?)
}

#[pymodule]
fn logbern(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mu>()?;
    m.add_class::<LogarithmicOperator>()?;
    m.add_class::<Approximant>()?;
    m.add_function(wrap_pyfunction!(logarithmic, m)?)?;
    m.add_function(wrap_pyfunction!(warp, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sup_error, m)?)?;
    m.add_function(wrap_pyfunction!(voronovskaja_limit, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_noisy, m)?)?;
    m.add_function(wrap_pyfunction!(denoise, m)?)?;
    m.add_function(wrap_pyfunction!(seeded_noise_level, m)?)?;
    m.add_function(wrap_pyfunction!(paper_example, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
    m.add("SUITES", names)?;
    m.add("BUILTINS", logbern_core::function::BUILTIN_NAMES.to_vec())?;
    Ok(())
}
