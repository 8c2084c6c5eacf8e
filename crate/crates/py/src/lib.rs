//! Python bindings: potentials, determinants, zero finding, the inverse
//! pipeline, Green functions and spectral projections.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use degensl::green::{completeness_heuristic, green_function as green_sample};
use degensl::inverse::{run_pipeline, InverseConfig};
use degensl::ode::{endpoints as ode_endpoints, SolverOptions};
use degensl::potential::PotentialGrid;
use degensl::projection::{spectral_projection, ProjectionOptions};
use degensl::spectral::{find_zeros as spectral_find_zeros, BoundaryTheta, Determinant, SearchRegion};
use degensl::target::TargetDeterminant;
use degensl::Error;

create_exception!(pydegensl, NumericalError, PyException);

fn to_py(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        NumericalError::new_err(format!("{}: {e}", e.kind()))
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn determinant(name: &str) -> PyResult<Determinant> {
    match name {
        "characteristic" | "delta" => Ok(Determinant::Characteristic),
        "dirichlet" => Ok(Determinant::Dirichlet),
        other => Err(PyValueError::new_err(format!("unknown determinant {other:?}"))),
    }
}

fn theta(t: u8) -> PyResult<BoundaryTheta> {
    BoundaryTheta::new(t).map_err(to_py)
}

/// Potential sampled on a uniform grid over `[0, pi]`.
#[pyclass(name = "Potential", frozen)]
pub struct PyPotential {
    inner: PotentialGrid,
}

#[pymethods]
impl PyPotential {
    #[new]
    fn new(values: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: PotentialGrid::new(values).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (name, n_points = 2049))]
    fn builtin(name: &str, n_points: usize) -> PyResult<Self> {
        Ok(Self {
            inner: PotentialGrid::builtin(name, n_points).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    fn xs(&self) -> Vec<f64> {
        self.inner.xs()
    }

    fn values(&self) -> Vec<Complex64> {
        self.inner.values().to_vec()
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn __repr__(&self) -> String {
        format!("Potential(n_points={})", self.inner.n_points())
    }
}

/// `(c, c', s, s')` at `x = pi`.
#[pyfunction]
fn endpoints(q: &PyPotential, mu: Complex64) -> PyResult<(Complex64, Complex64, Complex64, Complex64)> {
    let e = ode_endpoints(&q.inner, mu, &SolverOptions::default()).map_err(to_py)?;
    Ok((e.c, e.c_prime, e.s, e.s_prime))
}

/// `Delta(mu) = c(pi, mu) - s'(pi, mu)`.
#[pyfunction]
fn char_det(q: &PyPotential, mu: Complex64) -> PyResult<Complex64> {
    let e = ode_endpoints(&q.inner, mu, &SolverOptions::default()).map_err(to_py)?;
    Ok(e.c - e.s_prime)
}

/// Zeros inside `region = (re_min, re_max, im_min, im_max)` as
/// `(mu, lambda, multiplicity)` tuples, smallest `|lambda|` first.
#[pyfunction]
#[pyo3(signature = (q, region, det = "characteristic", theta_ = 0))]
fn find_zeros(
    q: &PyPotential,
    region: (f64, f64, f64, f64),
    det: &str,
    theta_: u8,
) -> PyResult<Vec<(Complex64, Complex64, u32)>> {
    let r = SearchRegion::new(region.0, region.1, region.2, region.3).map_err(to_py)?;
    let pts = spectral_find_zeros(determinant(det)?, &q.inner, theta(theta_)?, &r).map_err(to_py)?;
    Ok(pts.iter().map(|p| (p.mu, p.lambda, p.multiplicity)).collect())
}

/// Reconstruct a potential from real sine coefficients; returns the potential
/// and the verification report as a dict.
#[pyfunction]
#[pyo3(signature = (coeffs, m = 0, scale = 1.0, grid_points = 2049, truncation_m = 64))]
fn reconstruct<'py>(
    py: Python<'py>,
    coeffs: Vec<Complex64>,
    m: u32,
    scale: f64,
    grid_points: usize,
    truncation_m: usize,
) -> PyResult<(PyPotential, Bound<'py, PyAny>)> {
    let t = TargetDeterminant::new(coeffs, m, scale).map_err(to_py)?;
    let cfg = InverseConfig {
        grid_points,
        truncation_m,
        ..InverseConfig::default()
    };
    let (rec, report) = py.detach(|| run_pipeline(&t, &cfg)).map_err(to_py)?;
    Ok((PyPotential { inner: rec.q_hat }, json_to_py(py, &report)?))
}

/// `G(x_i, xi_j)` as a list of rows on every `stride`-th grid node.
#[pyfunction]
#[pyo3(signature = (q, mu, theta_ = 0, stride = 8))]
fn green_function(q: &PyPotential, mu: Complex64, theta_: u8, stride: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let g = green_sample(&q.inner, theta(theta_)?, mu, stride).map_err(to_py)?;
    Ok(g.values.chunks(g.n_points).map(|r| r.to_vec()).collect())
}

/// Projection summaries for the first `count` eigenvalues in `region`.
#[pyfunction]
#[pyo3(signature = (q, region, count = 5, theta_ = 0))]
fn projections<'py>(
    py: Python<'py>,
    q: &PyPotential,
    region: (f64, f64, f64, f64),
    count: usize,
    theta_: u8,
) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let th = theta(theta_)?;
    let r = SearchRegion::new(region.0, region.1, region.2, region.3).map_err(to_py)?;
    let pts = spectral_find_zeros(Determinant::Characteristic, &q.inner, th, &r).map_err(to_py)?;
    let opts = ProjectionOptions::default();
    let mut out = Vec::new();
    for p in pts.iter().take(count) {
        let k = py
            .detach(|| spectral_projection(&q.inner, th, p, &pts, &opts))
            .map_err(to_py)?;
        let summary = serde_json::json!({
            "lambda": p.lambda,
            "multiplicity": p.multiplicity,
            "norm": k.norm(),
            "trace": k.trace(),
            "idempotence_defect": k.idempotence_defect().map_err(to_py)?,
            "rank": k.rank(opts.rank_floor),
        });
        out.push(json_to_py(py, &summary)?);
    }
    Ok(out)
}

/// Symmetry and endpoint-derivative diagnostics with a completeness verdict.
#[pyfunction]
#[pyo3(signature = (q, epsilon = 0.5, tol = 1e-6))]
fn completeness<'py>(py: Python<'py>, q: &PyPotential, epsilon: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    json_to_py(py, &completeness_heuristic(&q.inner, epsilon, tol))
}

#[pymodule]
fn pydegensl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_function(wrap_pyfunction!(endpoints, m)?)?;
    m.add_function(wrap_pyfunction!(char_det, m)?)?;
    m.add_function(wrap_pyfunction!(find_zeros, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(green_function, m)?)?;
    m.add_function(wrap_pyfunction!(projections, m)?)?;
    m.add_function(wrap_pyfunction!(completeness, m)?)?;
    Ok(())
}
