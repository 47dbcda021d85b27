//! Python bindings. Phases, amplitudes and domains use the same text forms as
//! the command line (`quadratic:c=0`, `gaussian:sigma=1`, `0,1`, `line`).

use mlfc_core::bounds::{fit_decay as core_fit, geometric_grid, theoretical_rate as core_rate, verify_bound as core_verify};
use mlfc_core::bounds::{FitModel, TheoremId, TheoremSetting, VerifyOptions};
use mlfc_core::fpde::{kg_solve as core_kg, schrodinger_solve as core_schrodinger, FieldSnapshot, PdeProblem, UniformGrid};
use mlfc_core::mlf::{ml_eval_asymptotic, ml_eval_oracle, MlParams};
use mlfc_core::oscint::{compute_integral as core_integral, OscIntegralSpec};
use mlfc_core::phases::{Amplitude, Domain, Phase};
use mlfc_core::Error;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(mlfc, HypothesisViolation, PyValueError);

fn py_err(e: Error) -> PyErr {
    if e.is_hypothesis_violation() {
        return HypothesisViolation::new_err(e.to_string());
    }
    match e {
        Error::InvalidParams(_) | Error::Parse(_) | Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn params(alpha: f64, beta: f64) -> PyResult<MlParams> {
    MlParams::new(alpha, beta).map_err(py_err)
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

/// `E_{α,β}(z)` to relative tolerance `tol`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, z, tol = 1e-10))]
fn ml_eval(alpha: f64, beta: f64, z: Complex64, tol: f64) -> PyResult<Complex64> {
    mlfc_core::mlf::ml_eval(params(alpha, beta)?, z, tol).map_err(py_err)
}

/// Multiprecision reference value with `digits ≥ 50`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, z, digits = 50))]
fn oracle(alpha: f64, beta: f64, z: Complex64, digits: u32) -> PyResult<Complex64> {
    ml_eval_oracle(params(alpha, beta)?, z, digits).map_err(py_err)
}

/// The asymptotic expansion truncated after `n_terms` algebraic terms.
#[pyfunction]
fn asymptotic(alpha: f64, beta: f64, z: Complex64, n_terms: usize) -> PyResult<Complex64> {
    ml_eval_asymptotic(params(alpha, beta)?, z, n_terms).map_err(py_err)
}

/// `(I(λ), error estimate, evaluations)`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, lam, phase, domain, amp = "one", quad_tol = 1e-9))]
fn compute_integral(alpha: f64, beta: f64, lam: f64, phase: &str, domain: &str, amp: &str, quad_tol: f64) -> PyResult<(Complex64, f64, usize)> {
    let spec = OscIntegralSpec {
        params: params(alpha, beta)?,
        lambda: lam,
        phase: parse::<Phase>(phase)?,
        amplitude: parse::<Amplitude>(amp)?,
        domain: parse::<Domain>(domain)?,
        quad_tol,
    };
    let r = core_integral(&spec).map_err(py_err)?;
    Ok((r.value(), r.est_error, r.n_evals))
}

/// `(exponent, log power, base)` of the guaranteed rate.
#[pyfunction]
fn theoretical_rate(alpha: f64, beta: f64, k: u32, theorem: &str) -> PyResult<(f64, f64, String)> {
    let id: TheoremId = parse(theorem)?;
    let r = core_rate(params(alpha, beta)?, k, &TheoremSetting::new(id)).map_err(py_err)?;
    Ok((r.exponent, r.log_power, format!("{:?}", r.base)))
}

/// Least-squares `(slope, intercept, r²)` of `log|I|` against `log λ`,
/// optionally after dividing by `log^p(1+λ)`.
#[pyfunction]
#[pyo3(signature = (lambdas, values, log_power = None))]
fn fit_decay(lambdas: Vec<f64>, values: Vec<f64>, log_power: Option<f64>) -> PyResult<(f64, f64, f64)> {
    if lambdas.len() != values.len() {
        return Err(PyValueError::new_err("lambdas and values differ in length"));
    }
    let samples: Vec<(f64, f64)> = lambdas.into_iter().zip(values).collect();
    let model = match log_power {
        Some(p) => FitModel::PowerWithLog { p },
        None => FitModel::PurePower,
    };
    let f = core_fit(&samples, model).map_err(py_err)?;
    Ok((f.slope, f.intercept, f.r_squared))
}

/// Full verdict as a JSON string.
#[pyfunction]
#[pyo3(signature = (theorem, alpha, beta, k, phase, domain, amp = "one", grid = (10.0, 1e4, 16), quad_tol = 1e-9))]
#[allow(clippy::too_many_arguments)]
fn verify_bound(
    theorem: &str,
    alpha: f64,
    beta: f64,
    k: u32,
    phase: &str,
    domain: &str,
    amp: &str,
    grid: (f64, f64, usize),
    quad_tol: f64,
) -> PyResult<String> {
    let grid = geometric_grid(grid.0, grid.1, grid.2).map_err(py_err)?;
    let family = OscIntegralSpec {
        params: params(alpha, beta)?,
        lambda: grid[0],
        phase: parse::<Phase>(phase)?,
        amplitude: parse::<Amplitude>(amp)?,
        domain: parse::<Domain>(domain)?,
        quad_tol,
    };
    let id: TheoremId = parse(theorem)?;
    let r = core_verify(&family, &TheoremSetting::new(id), k, &grid, &VerifyOptions::default()).map_err(py_err)?;
    serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn field(s: FieldSnapshot) -> (Vec<f64>, Vec<Complex64>) {
    let v = s.values();
    (s.x, v)
}

/// `(x, u(t, x))` for the fractional Klein-Gordon problem.
#[pyfunction]
#[pyo3(signature = (alpha, mu, t, x = (-10.0, 10.0, 401), psi_hat = "gaussian:sigma=1", tol = 1e-9))]
fn kg_solve(alpha: f64, mu: f64, t: f64, x: (f64, f64, usize), psi_hat: &str, tol: f64) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let grid = UniformGrid::new(x.0, x.1, x.2).map_err(py_err)?;
    let p = PdeProblem::klein_gordon(alpha, mu, parse(psi_hat)?, grid, tol).map_err(py_err)?;
    core_kg(&p, t).map(field).map_err(py_err)
}

/// `(x, u(t, x))` for the fractional Schrödinger problem.
#[pyfunction]
#[pyo3(signature = (alpha, gamma, mu, t, x = (-10.0, 10.0, 401), psi_hat = "gaussian:sigma=1", tol = 1e-9))]
fn schrodinger_solve(alpha: f64, gamma: f64, mu: f64, t: f64, x: (f64, f64, usize), psi_hat: &str, tol: f64) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let grid = UniformGrid::new(x.0, x.1, x.2).map_err(py_err)?;
    let p = PdeProblem::schrodinger(alpha, gamma, mu, parse(psi_hat)?, grid, tol).map_err(py_err)?;
    core_schrodinger(&p, t).map(field).map_err(py_err)
}

#[pymodule]
fn mlfc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HypothesisViolation", m.py().get_type_bound::<HypothesisViolation>())?;
    m.add_function(wrap_pyfunction!(ml_eval, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(compute_integral, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_rate, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bound, m)?)?;
    m.add_function(wrap_pyfunction!(kg_solve, m)?)?;
    m.add_function(wrap_pyfunction!(schrodinger_solve, m)?)?;
    Ok(())
}
