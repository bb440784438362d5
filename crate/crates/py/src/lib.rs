//! Python bindings. Requests and reports cross the boundary as JSON strings
//! with the same schema the CLI writes; a few direct entry points return
//! complex numbers.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use susyrmt::detkernels::{generating_function_det, hciz_closed_form, sqrt_berezinian, BerezinianForm};
use susyrmt::driver::{self, ComputeRequest, Suite, VerifyOptions};
use susyrmt::ensembles::{mc_generating_function, EnsembleSpec, SourceKappa};
use susyrmt::susyreps::{generating_function_susy, SusyOptions};
use susyrmt::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Validation(m) => PyValueError::new_err(m),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Runs a compute request given as JSON and returns the report as JSON.
#[pyfunction]
fn compute(request_json: &str) -> PyResult<String> {
    let req: ComputeRequest =
        serde_json::from_str(request_json).map_err(|e| PyValueError::new_err(format!("malformed request: {e}")))?;
    driver::run_compute(&req).and_then(|r| r.to_json()).map_err(to_py)
}

/// Runs a verification suite and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (suite, seed=None, mc_samples=None))]
fn verify(suite: &str, seed: Option<u64>, mc_samples: Option<usize>) -> PyResult<String> {
    let suite: Suite = suite.parse().map_err(to_py)?;
    let d = VerifyOptions::default();
    let opts = VerifyOptions {
        seed: seed.unwrap_or(d.seed),
        mc_samples: mc_samples.unwrap_or(d.mc_samples),
        ..d
    };
    driver::run_verify(suite, &opts).and_then(|r| r.to_json()).map_err(to_py)
}

/// Generating function of the `N x N` Gaussian ensemble by one method:
/// `"det"`, `"susy"` or `"mc"` (the last needs `seed`).
#[pyfunction]
#[pyo3(signature = (n, kappa_bos, kappa_ferm, method="det", samples=100_000, seed=None))]
fn generating_function(
    n: usize,
    kappa_bos: Vec<C64>,
    kappa_ferm: Vec<C64>,
    method: &str,
    samples: usize,
    seed: Option<u64>,
) -> PyResult<C64> {
    let ens = EnsembleSpec::gue(n).map_err(to_py)?;
    let kappa = SourceKappa::new(kappa_bos, kappa_ferm);
    let r = match method {
        "det" => generating_function_det(&ens, &kappa, None),
        "susy" => generating_function_susy(&ens, &kappa, &SusyOptions::default()),
        "mc" => {
            let seed = seed.ok_or_else(|| PyValueError::new_err("mc needs a seed"))?;
            mc_generating_function(&ens, &kappa, samples, seed).map(|e| e.mean)
        }
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    };
    r.map_err(to_py)
}

/// Square root of the Berezinian of `diag(bos, ferm)`.
#[pyfunction]
fn sqrt_ber(bos: Vec<C64>, ferm: Vec<C64>) -> PyResult<C64> {
    sqrt_berezinian(&bos, &ferm, BerezinianForm::Ratio).map(|v| v.value).map_err(to_py)
}

/// Closed form of the HCIZ integral.
#[pyfunction]
fn hciz(e: Vec<f64>, et: Vec<f64>) -> PyResult<C64> {
    hciz_closed_form(&e, &et).map_err(to_py)
}

#[pymodule]
fn susyrmt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", driver::VERSION)?;
    m.add_function(wrap_pyfunction!(compute, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(generating_function, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_ber, m)?)?;
    m.add_function(wrap_pyfunction!(hciz, m)?)?;
    Ok(())
}
