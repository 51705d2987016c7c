//! Python bindings for the savings-chaos library.
//!
//! Reports come back as plain dicts; invalid arguments raise `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use savings_chaos::analysis::{self, ClassifyBudget, CycleOptions, CycleReport, Verdict};
use savings_chaos::numeric::{Bits, Precision, Wide};
use savings_chaos::process::{self, ChaoticConfig, Process, ProcessParams};
use savings_chaos::semiconjugacy::{self, GapSystem, ResidualCheck};
use savings_chaos::words::{self, RotationParams};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(
    name = "ProcessParams",
    frozen,
    skip_from_py_object,
    module = "savings_chaos"
)]
#[derive(Clone)]
struct PyProcessParams {
    inner: ProcessParams,
}

#[pymethods]
impl PyProcessParams {
    #[new]
    fn new(r: f64, v1: f64, v2: f64, rho: f64) -> PyResult<Self> {
        let inner = ProcessParams::new(r, v1, v2, rho).map_err(value_error)?;
        Ok(PyProcessParams { inner })
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }
    #[getter]
    fn v1(&self) -> f64 {
        self.inner.v1
    }
    #[getter]
    fn v2(&self) -> f64 {
        self.inner.v2
    }
    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    fn step(&self, x: f64) -> PyResult<f64> {
        self.inner.step(x).map_err(value_error)
    }

    fn absorbing_bound(&self) -> PyResult<f64> {
        process::absorbing_bound(&self.inner).map_err(value_error)
    }

    /// Balances `S_0..S_n`.
    fn simulate(&self, s0: f64, n: usize) -> PyResult<Vec<f64>> {
        Ok(process::simulate(&self.inner, s0, n)
            .map_err(value_error)?
            .values)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ProcessParams(r={}, v1={}, v2={}, rho={})",
            p.r, p.v1, p.v2, p.rho
        )
    }
}

#[pyclass(
    name = "ChaoticConfig",
    frozen,
    skip_from_py_object,
    module = "savings_chaos"
)]
#[derive(Clone)]
struct PyChaoticConfig {
    inner: ChaoticConfig,
}

#[pymethods]
impl PyChaoticConfig {
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }
    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }
    #[getter]
    fn r(&self) -> f64 {
        self.inner.r()
    }
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta()
    }
    #[getter]
    fn truncation_order(&self) -> usize {
        self.inner.truncation_order
    }
    #[getter]
    fn truncation_bound(&self) -> f64 {
        self.inner.truncation_bound
    }

    fn params(&self) -> PyProcessParams {
        PyProcessParams {
            inner: self.inner.params(),
        }
    }

    fn invariant_interval(&self) -> (f64, f64) {
        self.inner.invariant_interval()
    }

    fn excluded_gap(&self) -> (f64, f64) {
        self.inner.excluded_gap()
    }

    fn conjugacy(&self, x: f64) -> f64 {
        self.inner.conjugacy(x)
    }

    fn __repr__(&self) -> String {
        format!(
            "ChaoticConfig(b={}, delta={}, rho={})",
            self.inner.b, self.inner.delta, self.inner.rho
        )
    }
}

#[pyclass(name = "GapSystem", frozen, module = "savings_chaos")]
struct PyGapSystem {
    inner: GapSystem,
}

#[pymethods]
impl PyGapSystem {
    /// Gap system of the golden rotation for base `b`, truncated at `order`.
    #[new]
    #[pyo3(signature = (b = 2.0, order = 60))]
    fn new(b: f64, order: usize) -> PyResult<Self> {
        let inner = GapSystem::golden(b, order).map_err(value_error)?;
        Ok(PyGapSystem { inner })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn tail_mass(&self) -> f64 {
        self.inner.tail_mass()
    }

    fn h(&self, x: f64) -> f64 {
        self.inner.h(x)
    }

    fn breakpoint(&self) -> f64 {
        semiconjugacy::breakpoint_from_gaps(&self.inner)
    }

    /// `|h(g(x)) - T(h(x))|`, or `None` inside the exclusion band.
    fn residual(&self, config: &PyChaoticConfig, x: f64) -> PyResult<Option<f64>> {
        let m = config.inner.normalized_map();
        let r = semiconjugacy::semiconjugacy_residual(&self.inner, &m, x).map_err(value_error)?;
        Ok(match r {
            ResidualCheck::Measured(v) => Some(v),
            ResidualCheck::Inconclusive => None,
        })
    }

    fn predict_frequency<'py>(
        &self,
        py: Python<'py>,
        config: &PyChaoticConfig,
        lo: f64,
        hi: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let p = semiconjugacy::predict_frequency(&self.inner, &config.inner, (lo, hi));
        let d = PyDict::new(py);
        d.set_item("interval", p.interval)?;
        d.set_item("predicted", p.predicted)?;
        d.set_item("truncation_error", p.truncation_error)?;
        Ok(d)
    }
}

/// The orbit engine selected by a `precision` argument.
enum Engine {
    Double(Process<f64>),
    Extended(Process<Wide>),
}

fn model_params(model: &Bound<'_, PyAny>) -> PyResult<(ProcessParams, Option<ChaoticConfig>)> {
    if let Ok(c) = model.cast::<PyChaoticConfig>() {
        let c = c.get().inner;
        return Ok((c.params(), Some(c)));
    }
    if let Ok(p) = model.cast::<PyProcessParams>() {
        return Ok((p.get().inner, None));
    }
    Err(PyValueError::new_err(
        "expected ProcessParams or ChaoticConfig",
    ))
}

/// `precision` is `"double"`, `"extended"` or `"auto"` (extended for the
/// chaotic family); `bits` defaults to a size matched to `horizon` steps.
fn engine(
    model: &Bound<'_, PyAny>,
    precision: &str,
    bits: Option<usize>,
    horizon: usize,
) -> PyResult<Engine> {
    let (params, chaotic) = model_params(model)?;
    let extended = match precision {
        "double" => false,
        "extended" => true,
        "auto" => chaotic.is_some(),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown precision {other:?}"
            )))
        }
    };
    if !extended {
        return Ok(Engine::Double(params.process(&())));
    }
    let bits = bits
        .unwrap_or_else(|| Precision::for_horizon(horizon as u64, params.contraction(), 0).bits());
    Ok(Engine::Extended(match chaotic {
        Some(c) => c.wide_process(bits),
        None => params.process(&Bits(bits)),
    }))
}

fn cycle_dict<'py>(py: Python<'py>, r: &CycleReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("found", r.found())?;
    d.set_item(
        "status",
        match r.status {
            analysis::CycleStatus::Found => "found",
            analysis::CycleStatus::NotFound => "not_found",
            analysis::CycleStatus::Inconclusive => "inconclusive",
        },
    )?;
    d.set_item("period", r.period)?;
    d.set_item("cycle_points", r.cycle_points.clone())?;
    d.set_item("transient_length", r.transient_length)?;
    d.set_item("residual", r.residual)?;
    d.set_item("iterations", r.iterations)?;
    Ok(d)
}

#[pyfunction]
fn fibonacci_word(n: usize) -> PyResult<String> {
    Ok(words::fibonacci_word(n).map_err(value_error)?.to_string())
}

#[pyfunction]
fn rotation_coding(alpha: f64, x0: f64, n: usize) -> PyResult<Vec<u32>> {
    let rp = RotationParams::new(alpha).map_err(value_error)?;
    let coding = words::rotation_coding(&rp, x0, n).map_err(value_error)?;
    // a list of symbols rather than a bytes object
    Ok(coding.into_iter().map(u32::from).collect())
}

#[pyfunction]
#[pyo3(signature = (b, precision_target = process::DEFAULT_PRECISION_TARGET))]
fn chaotic_params(b: f64, precision_target: f64) -> PyResult<PyChaoticConfig> {
    let inner = process::chaotic_params(b, precision_target).map_err(value_error)?;
    Ok(PyChaoticConfig { inner })
}

#[pyfunction]
fn closed_form(v: f64, r: f64, s0: f64, n: u64) -> PyResult<f64> {
    process::closed_form(v, r, s0, n).map_err(value_error)
}

/// Orbit of `s0`, rounded to binary64 for output.
#[pyfunction]
#[pyo3(signature = (model, s0, n, precision = "double", bits = None))]
fn simulate(
    model: &Bound<'_, PyAny>,
    s0: f64,
    n: usize,
    precision: &str,
    bits: Option<usize>,
) -> PyResult<Vec<f64>> {
    if !(s0 >= 0.0) {
        return Err(value_error(format!("balance {s0} is negative")));
    }
    Ok(match engine(model, precision, bits, n)? {
        Engine::Double(p) => process::simulate_with(&p, &s0, n).values,
        Engine::Extended(p) => process::simulate_with(&p, &p.lift(s0), n).values,
    })
}

#[pyfunction]
#[pyo3(signature = (model, s0, max_iter = 100_000, tol = 1e-9, max_period = 1000, precision = "auto", bits = None))]
#[allow(clippy::too_many_arguments)]
fn detect_cycle<'py>(
    py: Python<'py>,
    model: &Bound<'py, PyAny>,
    s0: f64,
    max_iter: usize,
    tol: f64,
    max_period: usize,
    precision: &str,
    bits: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    if !(tol > 0.0) {
        return Err(value_error("tol must be positive"));
    }
    let opts = CycleOptions {
        max_iter,
        max_period,
        tol,
    };
    let report = match engine(model, precision, bits, max_iter)? {
        Engine::Double(p) => analysis::detect_cycle(&p, &s0, &opts),
        Engine::Extended(p) => analysis::detect_cycle(&p, &p.lift(s0), &opts),
    };
    cycle_dict(py, &report)
}

/// Periodic / Cantor-like / inconclusive verdict from the two critical orbits.
#[pyfunction]
#[pyo3(signature = (model, max_iter = 100_000, tol = 1e-9, precision = "auto", bits = None))]
fn classify<'py>(
    py: Python<'py>,
    model: &Bound<'py, PyAny>,
    max_iter: usize,
    tol: f64,
    precision: &str,
    bits: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let budget = ClassifyBudget {
        cycle: CycleOptions {
            max_iter,
            tol,
            ..CycleOptions::default()
        },
        ..ClassifyBudget::default()
    };
    let horizon = max_iter.max(budget.burn_in + budget.samples);
    let verdict = match engine(model, precision, bits, horizon)? {
        Engine::Double(p) => analysis::classify_dichotomy(&p, &budget),
        Engine::Extended(p) => analysis::classify_dichotomy(&p, &budget),
    };
    let d = PyDict::new(py);
    d.set_item("verdict", verdict.name())?;
    d.set_item("periods", verdict.periods())?;
    match &verdict {
        Verdict::Periodic { cycles } => {
            let list = cycles
                .iter()
                .map(|c| cycle_dict(py, c))
                .collect::<PyResult<Vec<_>>>()?;
            d.set_item("cycles", list)?;
        }
        Verdict::CantorLike { evidence } => {
            d.set_item("cluster_counts", evidence.cluster_counts.clone())?;
            d.set_item("hull", evidence.hull)?;
        }
        Verdict::Inconclusive { reason } => d.set_item("reason", reason)?,
    }
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (model, s0, burn_in, samples, resolution, precision = "auto", bits = None))]
#[allow(clippy::too_many_arguments)]
fn omega_limit_approx(
    model: &Bound<'_, PyAny>,
    s0: f64,
    burn_in: usize,
    samples: usize,
    resolution: f64,
    precision: &str,
    bits: Option<usize>,
) -> PyResult<Vec<f64>> {
    if !(resolution > 0.0) {
        return Err(value_error("resolution must be positive"));
    }
    let o = match engine(model, precision, bits, burn_in + samples)? {
        Engine::Double(p) => analysis::omega_limit_approx(&p, &s0, burn_in, samples, resolution),
        Engine::Extended(p) => {
            analysis::omega_limit_approx(&p, &p.lift(s0), burn_in, samples, resolution)
        }
    };
    Ok(o.points)
}

/// Counts `0 <= n < N` with `S_n` in `[lo, hi]`; adds the ergodic
/// prediction for the chaotic family.
#[pyfunction]
#[pyo3(signature = (model, s0, lo, hi, n, precision = "double", bits = None))]
#[allow(clippy::too_many_arguments)]
fn visit_frequency<'py>(
    py: Python<'py>,
    model: &Bound<'py, PyAny>,
    s0: f64,
    lo: f64,
    hi: f64,
    n: usize,
    precision: &str,
    bits: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    if n == 0 || !(lo <= hi) {
        return Err(value_error("need N >= 1 and lo <= hi"));
    }
    let mut f = match engine(model, precision, bits, n)? {
        Engine::Double(p) => analysis::visit_frequency(&p, &s0, (lo, hi), n),
        Engine::Extended(p) => analysis::visit_frequency(&p, &p.lift(s0), (lo, hi), n),
    };
    if let (_, Some(c)) = model_params(model)? {
        let gs = GapSystem::golden(c.b, 60).map_err(value_error)?;
        f = f.with_prediction(&gs, &c);
    }
    let d = PyDict::new(py);
    d.set_item("count", f.count)?;
    d.set_item("n", f.n)?;
    d.set_item("freq", f.freq)?;
    d.set_item("predicted", f.predicted)?;
    d.set_item("prediction_error", f.prediction_error)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (config, s0, epsilon, max_iter = 1000))]
fn sensitivity_probe<'py>(
    py: Python<'py>,
    config: &PyChaoticConfig,
    s0: f64,
    epsilon: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    if !(epsilon > 0.0) {
        return Err(value_error("epsilon must be positive"));
    }
    let r = analysis::sensitivity_probe(&config.inner, s0, epsilon, max_iter);
    let d = PyDict::new(py);
    d.set_item("found", r.found)?;
    d.set_item("s0", r.s0)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("eta", r.eta)?;
    d.set_item("witness_s0prime", r.witness_s0prime)?;
    d.set_item("witness_k", r.witness_k)?;
    d.set_item("achieved_separation", r.achieved_separation)?;
    d.set_item("bits", r.precision.bits())?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "savings_chaos")]
fn savings_chaos_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProcessParams>()?;
    m.add_class::<PyChaoticConfig>()?;
    m.add_class::<PyGapSystem>()?;
    m.add_function(wrap_pyfunction!(fibonacci_word, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_coding, m)?)?;
    m.add_function(wrap_pyfunction!(chaotic_params, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(detect_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(omega_limit_approx, m)?)?;
    m.add_function(wrap_pyfunction!(visit_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_probe, m)?)?;
    Ok(())
}
