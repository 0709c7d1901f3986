//! Python bindings. Results cross the boundary as plain dicts built from the
//! library's JSON serialization.

use cantor::equivalence::{self, SearchBounds};
use cantor::radix::{parse_number, parse_rational, Alphabet};
use cantor::{betaexp, intervals, kernel, measure, DigitSet, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

/// JSON layer shared by the Python methods and the Rust tests.
pub mod api {
    use super::*;
    use cantor::Result;

    fn num(ds: &DigitSet, code: &str, alphabet: &str) -> Result<cantor::PeriodicCode> {
        Ok(parse_number(code, ds, Alphabet::parse(alphabet)?)?.code)
    }

    pub fn classify(ds: &DigitSet) -> String {
        json(&ds.classify())
    }

    pub fn sigma(ds: &DigitSet, code: &str, depth: usize, alphabet: &str) -> Result<String> {
        Ok(json(&kernel::sigma_trace(ds, &num(ds, code, alphabet)?, depth)?))
    }

    pub fn psi(ds: &DigitSet, code: &str) -> Result<String> {
        Ok(json(&kernel::psi(ds, &num(ds, code, "nary")?)?))
    }

    pub fn intersect(ds: &DigitSet, code: &str, depth: usize, budget: u64, alphabet: &str) -> Result<String> {
        Ok(json(&intervals::intersect_level(ds, &num(ds, code, alphabet)?, depth, budget)?))
    }

    pub fn boxcount(ds: &DigitSet, code: &str, kmax: usize, budget: u64, alphabet: &str) -> Result<String> {
        Ok(json(&intervals::boxcount_curve(ds, &num(ds, code, alphabet)?, kmax, budget)?))
    }

    pub fn selfsim(ds: &DigitSet, code: &str, alphabet: &str) -> Result<String> {
        Ok(json(&equivalence::self_similar_report(ds, &num(ds, code, alphabet)?)?))
    }

    pub fn dimension(ds: &DigitSet, code: &str, alphabet: &str) -> Result<String> {
        Ok(json(&equivalence::dimension(ds, &num(ds, code, alphabet)?)?))
    }

    pub fn equivalent(ds: &DigitSet, a: &str, b: &str, alphabet: &str) -> Result<String> {
        Ok(json(&equivalence::equivalent(ds, &num(ds, a, alphabet)?, &num(ds, b, alphabet)?)?))
    }

    pub fn is_finite(ds: &DigitSet, code: &str, alphabet: &str) -> Result<String> {
        Ok(json(&equivalence::is_finite(ds, &num(ds, code, alphabet)?)?))
    }

    pub fn strongly_periodic(ds: &DigitSet, code: &str, alphabet: &str) -> Result<String> {
        Ok(json(&equivalence::strongly_periodic(ds, &num(ds, code, alphabet)?)?))
    }

    pub fn rational_equivalent(ds: &DigitSet, code: &str, kmax: usize, qmax: usize, alphabet: &str) -> Result<String> {
        let c = num(ds, code, alphabet)?;
        Ok(json(&equivalence::rational_equivalent(ds, &c, SearchBounds { kmax, qmax })?))
    }

    pub fn generate_nonequivalent(ds: &DigitSet, alpha: &str, delta: i64, bits: &[bool], depth: usize) -> Result<String> {
        let c = num(ds, alpha, "delta_plus")?;
        Ok(json(&equivalence::generate_nonequivalent(ds, &c, delta, bits, depth)?))
    }

    pub fn g_beta(n: i64, omega: Vec<i64>, beta: &str, code: &str) -> Result<String> {
        let sys = betaexp::BetaSystem::new(n, omega, parse_rational(beta)?)?;
        let c = cantor::radix::parse_code(code, n, Alphabet::Nary)?;
        Ok(json(&serde_json::json!({
            "g_beta": cantor::radix::fmt_rational(&betaexp::g_beta(&sys, &c)?),
            "gamma_scale": cantor::radix::fmt_rational(&betaexp::gamma_scale(&sys)),
            "gamma_point": cantor::radix::fmt_rational(&betaexp::gamma_point(&sys, &c)?),
        })))
    }
}

fn loads(py: Python<'_>, text: String) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn wrap(py: Python<'_>, r: cantor::Result<String>) -> PyResult<Py<PyAny>> {
    loads(py, r.map_err(to_py_err)?)
}

/// Digit set `D` in base `n`.
#[pyclass(name = "DigitSet", module = "cantor_py", frozen)]
struct PyDigitSet {
    inner: DigitSet,
}

#[pymethods]
impl PyDigitSet {
    #[new]
    fn new(base: i64, digits: Vec<i64>) -> PyResult<Self> {
        Ok(PyDigitSet {
            inner: DigitSet::new(base, digits).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn base(&self) -> i64 {
        self.inner.base()
    }

    #[getter]
    fn digits(&self) -> Vec<i64> {
        self.inner.digits().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("DigitSet(base={}, digits={:?})", self.inner.base(), self.inner.digits())
    }

    fn classify(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        loads(py, api::classify(&self.inner))
    }

    #[pyo3(signature = (code, depth, alphabet = "nary"))]
    fn sigma(&self, py: Python<'_>, code: &str, depth: usize, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::sigma(&self.inner, code, depth, alphabet))
    }

    fn psi(&self, py: Python<'_>, code: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::psi(&self.inner, code))
    }

    #[pyo3(signature = (code, depth, budget = intervals::DEFAULT_BUDGET, alphabet = "nary"))]
    fn intersect(&self, py: Python<'_>, code: &str, depth: usize, budget: u64, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::intersect(&self.inner, code, depth, budget, alphabet))
    }

    #[pyo3(signature = (code, kmax, budget = intervals::DEFAULT_BUDGET, alphabet = "nary"))]
    fn boxcount(&self, py: Python<'_>, code: &str, kmax: usize, budget: u64, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::boxcount(&self.inner, code, kmax, budget, alphabet))
    }

    #[pyo3(signature = (code, alphabet = "nary"))]
    fn selfsim(&self, py: Python<'_>, code: &str, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::selfsim(&self.inner, code, alphabet))
    }

    #[pyo3(signature = (code, alphabet = "nary"))]
    fn dimension(&self, py: Python<'_>, code: &str, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::dimension(&self.inner, code, alphabet))
    }

    #[pyo3(signature = (a, b, alphabet = "nary"))]
    fn equivalent(&self, py: Python<'_>, a: &str, b: &str, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::equivalent(&self.inner, a, b, alphabet))
    }

    #[pyo3(signature = (code, alphabet = "delta_plus"))]
    fn is_finite(&self, py: Python<'_>, code: &str, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::is_finite(&self.inner, code, alphabet))
    }

    #[pyo3(signature = (code, alphabet = "delta_plus"))]
    fn strongly_periodic(&self, py: Python<'_>, code: &str, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::strongly_periodic(&self.inner, code, alphabet))
    }

    #[pyo3(signature = (code, kmax = 20, qmax = 12, alphabet = "delta_plus"))]
    fn rational_equivalent(&self, py: Python<'_>, code: &str, kmax: usize, qmax: usize, alphabet: &str) -> PyResult<Py<PyAny>> {
        wrap(py, api::rational_equivalent(&self.inner, code, kmax, qmax, alphabet))
    }

    fn generate_nonequivalent(&self, py: Python<'_>, alpha: &str, delta: i64, bits: Vec<bool>, depth: usize) -> PyResult<Py<PyAny>> {
        wrap(py, api::generate_nonequivalent(&self.inner, alpha, delta, &bits, depth))
    }
}

#[pyfunction]
fn measure_two_digit(py: Python<'_>, n: u64, a: u64, b: u64) -> PyResult<Py<PyAny>> {
    if !(n >= 3 && a < b && b < n) {
        return Err(PyValueError::new_err("need n ≥ 3 and 0 ≤ a < b < n"));
    }
    loads(py, json(&measure::measure_two_digit(n, a, b)))
}

#[pyfunction]
fn g_beta(py: Python<'_>, n: i64, omega: Vec<i64>, beta: &str, code: &str) -> PyResult<Py<PyAny>> {
    wrap(py, api::g_beta(n, omega, beta, code))
}

#[pyfunction]
fn thue_morse(len: usize) -> Vec<bool> {
    equivalence::thue_morse(len)
}

#[pymodule]
fn cantor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDigitSet>()?;
    m.add_function(wrap_pyfunction!(measure_two_digit, m)?)?;
    m.add_function(wrap_pyfunction!(g_beta, m)?)?;
    m.add_function(wrap_pyfunction!(thue_morse, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::api;
    use cantor::DigitSet;

    #[test]
    fn json_layer() {
        let ds = DigitSet::new(3, vec![0, 2]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&api::selfsim(&ds, "(20)", "nary").unwrap()).unwrap();
        assert_eq!(v["e"]["digits"], serde_json::json!([6, 8]));
        let g: serde_json::Value = serde_json::from_str(&api::g_beta(3, vec![0, 2], "1/4", "(2)").unwrap()).unwrap();
        assert_eq!(g["g_beta"], "2/3");
        assert!(api::sigma(&ds, "(2", 3, "nary").is_err());
    }
}
