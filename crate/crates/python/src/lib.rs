//! Python module `tulap`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tulap_core::intervals::{
    ci_approx_umpu, ci_bonferroni, ci_lower, ci_umau, ci_upper, confidence_distribution as core_cd,
};
use tulap_core::nonparametric::{self as np, Alternative, PairedSample, TestOutcome, TwoSample};
use tulap_core::simulation::{simulate as core_simulate, SimConfig};
use tulap_core::two_sided;
use tulap_core::{self as core, Side};

fn to_py(e: core::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn privacy(epsilon: f64, delta: f64) -> PyResult<core::PrivacyParams> {
    core::PrivacyParams::new(epsilon, delta).map_err(to_py)
}

fn side(name: &str) -> PyResult<Side> {
    match name {
        "greater" => Ok(Side::Greater),
        "less" => Ok(Side::Less),
        other => Err(PyValueError::new_err(format!("side must be 'greater' or 'less', got {other:?}"))),
    }
}

fn alternative(name: &str) -> PyResult<Alternative> {
    match name {
        "greater" => Ok(Alternative::Greater),
        "less" => Ok(Alternative::Less),
        "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
        other => Err(PyValueError::new_err(format!("unknown alternative {other:?}"))),
    }
}

/// Tulap noise with location `m`, geometric base `b` and truncation `q`.
#[pyclass(name = "Tulap", frozen)]
struct PyTulap {
    inner: core::TulapParams,
}

#[pymethods]
impl PyTulap {
    #[new]
    #[pyo3(signature = (m, b, q = 0.0))]
    fn new(m: f64, b: f64, q: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::TulapParams::new(m, b, q).map_err(to_py)?,
        })
    }

    /// Noise for an `(epsilon, delta)` budget centred at `m`.
    #[staticmethod]
    #[pyo3(signature = (epsilon, delta = 0.0, m = 0.0))]
    fn from_privacy(epsilon: f64, delta: f64, m: f64) -> PyResult<Self> {
        Ok(Self {
            inner: privacy(epsilon, delta)?.tulap(m),
        })
    }

    #[getter]
    fn m(&self) -> f64 {
        self.inner.m
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        self.inner.quantile(p).map_err(to_py)
    }

    fn sample(&self, size: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..size).map(|_| self.inner.sample(&mut rng)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Tulap(m={}, b={}, q={})", self.inner.m, self.inner.b, self.inner.q)
    }
}

/// A randomized test: `phi[x]` is the rejection probability at count `x`.
#[pyclass(name = "TestVector", frozen)]
struct PyTestVector {
    inner: core::TestVector,
}

#[pymethods]
impl PyTestVector {
    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.inner.phi.clone()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n
    }

    fn power(&self, theta: f64) -> PyResult<f64> {
        self.inner.power(theta).map_err(to_py)
    }

    fn size(&self) -> PyResult<f64> {
        self.inner.size().map_err(to_py)
    }

    /// Largest violation of the DP inequalities between neighbouring counts.
    fn dp_violation(&self) -> f64 {
        core::verify_dp(&self.inner, &self.inner.meta.privacy).max_violation
    }

    fn is_private(&self) -> bool {
        core::verify_dp(&self.inner, &self.inner.meta.privacy).passes
    }

    /// Draws the decision at count `x`.
    fn decide(&self, x: u64, seed: u64) -> PyResult<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(core::decide(&self.inner, x, &mut rng).map_err(to_py)?.reject)
    }
}

/// Releases `x + noise` for a count `x` out of `n`.
#[pyfunction]
#[pyo3(signature = (x, n, epsilon, seed, delta = 0.0))]
fn privatize(x: u64, n: u64, epsilon: f64, seed: u64, delta: f64) -> PyResult<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(core::privatize(x, n, &privacy(epsilon, delta)?, &mut rng).map_err(to_py)?.z)
}

/// Test vector of the given kind: "greater", "less", "bonferroni", "umpu" or "approx".
#[pyfunction]
#[pyo3(signature = (n, theta0, alpha, epsilon, delta = 0.0, kind = "greater"))]
fn test_vector(n: u64, theta0: f64, alpha: f64, epsilon: f64, delta: f64, kind: &str) -> PyResult<PyTestVector> {
    let p = privacy(epsilon, delta)?;
    let tv = match kind {
        "greater" | "less" => core::test_vector_one_sided(n, theta0, alpha, &p, side(kind)?),
        "bonferroni" => two_sided::bonferroni_test_vector(n, theta0, alpha, &p),
        "umpu" => two_sided::umpu_test_vector(n, theta0, alpha, &p),
        "approx" => two_sided::approx_test_vector(n, theta0, alpha, &p),
        other => return Err(PyValueError::new_err(format!("unknown test kind {other:?}"))),
    }
    .map_err(to_py)?;
    Ok(PyTestVector { inner: tv })
}

/// Exact one-sided p-value of a release `z`.
#[pyfunction]
#[pyo3(signature = (z, n, theta0, epsilon, delta = 0.0, side = "greater"))]
fn ump_pvalue(z: f64, n: u64, theta0: f64, epsilon: f64, delta: f64, side: &str) -> PyResult<f64> {
    core::ump_pvalue(z, n, theta0, &privacy(epsilon, delta)?, self::side(side)?, None).map_err(to_py)
}

/// Two-sided p-value: "bonferroni", "approx" or "umau".
#[pyfunction]
#[pyo3(signature = (z, n, theta0, epsilon, delta = 0.0, kind = "approx"))]
fn two_sided_pvalue(z: f64, n: u64, theta0: f64, epsilon: f64, delta: f64, kind: &str) -> PyResult<f64> {
    let p = privacy(epsilon, delta)?;
    match kind {
        "bonferroni" => two_sided::bonferroni_pvalue(z, n, theta0, &p),
        "approx" => two_sided::approx_pvalue(z, n, theta0, &p, None),
        "umau" => two_sided::umau_pvalue(z, n, theta0, &p),
        other => return Err(PyValueError::new_err(format!("unknown p-value kind {other:?}"))),
    }
    .map_err(to_py)
}

/// Centre and offset `(k, m)` of the unbiased two-sided test.
#[pyfunction]
#[pyo3(signature = (n, theta0, alpha, epsilon, delta = 0.0))]
fn umpu_solve(n: u64, theta0: f64, alpha: f64, epsilon: f64, delta: f64) -> PyResult<(f64, f64)> {
    let s = two_sided::umpu_solve(n, theta0, alpha, &privacy(epsilon, delta)?).map_err(to_py)?;
    Ok((s.k, s.m))
}

/// Confidence interval `(lower, upper)`: "lower", "upper", "bonferroni", "approx" or "umau".
#[pyfunction]
#[pyo3(signature = (z, n, alpha, epsilon, delta = 0.0, kind = "approx"))]
fn confidence_interval(z: f64, n: u64, alpha: f64, epsilon: f64, delta: f64, kind: &str) -> PyResult<(f64, f64)> {
    let p = privacy(epsilon, delta)?;
    let ci = match kind {
        "lower" => ci_lower(z, n, alpha, &p),
        "upper" => ci_upper(z, n, alpha, &p),
        "bonferroni" => ci_bonferroni(z, n, alpha, &p),
        "approx" => ci_approx_umpu(z, n, alpha, &p),
        "umau" => ci_umau(z, n, alpha, &p),
        other => return Err(PyValueError::new_err(format!("unknown interval kind {other:?}"))),
    }
    .map_err(to_py)?;
    Ok((ci.lower, ci.upper))
}

/// Confidence distribution values on an increasing grid in [0, 1].
#[pyfunction]
#[pyo3(signature = (z, n, grid, epsilon, delta = 0.0))]
fn confidence_distribution(z: f64, n: u64, grid: Vec<f64>, epsilon: f64, delta: f64) -> PyResult<Vec<f64>> {
    Ok(core_cd(z, n, &privacy(epsilon, delta)?, &grid).map_err(to_py)?.values)
}

fn outcome_dict<'py>(py: Python<'py>, o: &TestOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("z", o.z)?;
    d.set_item("p_value", o.p_value)?;
    d.set_item("n", o.n)?;
    d.set_item("epsilon", o.privacy.epsilon)?;
    d.set_item("delta", o.privacy.delta)?;
    Ok(d)
}

/// Private sign test on `(x, y)` pairs; tied pairs are dropped.
#[pyfunction]
#[pyo3(signature = (pairs, epsilon, seed, delta = 0.0, alternative = "two-sided", theta0 = 0.5))]
fn sign_test<'py>(
    py: Python<'py>,
    pairs: Vec<(f64, f64)>,
    epsilon: f64,
    seed: u64,
    delta: f64,
    alternative: &str,
    theta0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let sample = PairedSample::new(pairs).map_err(to_py)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = np::sign_test(&sample, theta0, &privacy(epsilon, delta)?, &mut rng, self::alternative(alternative)?)
        .map_err(to_py)?;
    outcome_dict(py, &o)
}

/// Private median test on two samples of equal size.
#[pyfunction]
#[pyo3(signature = (xs, ys, epsilon, seed, delta = 0.0, alternative = "two-sided"))]
fn median_test<'py>(
    py: Python<'py>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    epsilon: f64,
    seed: u64,
    delta: f64,
    alternative: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let ts = TwoSample::new(xs, ys).map_err(to_py)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = np::median_test(&ts, &privacy(epsilon, delta)?, &mut rng, self::alternative(alternative)?)
        .map_err(to_py)?;
    outcome_dict(py, &o)
}

/// Runs a preset design and returns one dict per result row.
#[pyfunction]
#[pyo3(signature = (figure, seed, replicates = None, ns = None))]
fn simulate<'py>(
    py: Python<'py>,
    figure: u8,
    seed: u64,
    replicates: Option<u64>,
    ns: Option<Vec<u64>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = SimConfig::figure(figure).map_err(to_py)?;
    cfg.seed = seed;
    if let Some(r) = replicates {
        cfg.replicates = r;
    }
    if let Some(ns) = ns {
        cfg.ns = ns;
    }
    let result = py.detach(|| core_simulate(&cfg)).map_err(to_py)?;
    result
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("theta0", r.theta0)?;
            d.set_item("theta", r.theta)?;
            d.set_item("method", format!("{:?}", r.method))?;
            d.set_item("metric", format!("{:?}", r.metric))?;
            d.set_item("estimate", r.estimate)?;
            d.set_item("mc_se", r.mc_se)?;
            d.set_item("replicates", r.replicates)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn tulap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add_class::<PyTulap>()?;
    m.add_class::<PyTestVector>()?;
    m.add_function(wrap_pyfunction!(privatize, m)?)?;
    m.add_function(wrap_pyfunction!(test_vector, m)?)?;
    m.add_function(wrap_pyfunction!(ump_pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(two_sided_pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(umpu_solve, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_interval, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(sign_test, m)?)?;
    m.add_function(wrap_pyfunction!(median_test, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
