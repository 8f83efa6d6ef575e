//! Python bindings: model balls, radial and disk eigenpairs, bounds and the comparison corpus.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::drift_spectra as ds;
use ds::disk::{build_model_disk, principal_and_adjoint, MetricFn};
use ds::expr::{Expr, Var};

fn to_py(e: ds::Error) -> PyErr {
    match e {
        ds::Error::InvalidInput(_) | ds::Error::Expression(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn warping(space_form: f64, expr: Option<&str>) -> PyResult<ds::WarpingFunction> {
    match expr {
        Some(src) => ds::WarpingFunction::from_expression(src, f64::INFINITY),
        None => ds::WarpingFunction::space_form(space_form),
    }
    .map_err(to_py)
}

/// Rotationally symmetric ball with a radial drift.
#[pyclass(name = "ModelBall", frozen)]
struct PyModelBall {
    inner: ds::ModelBall,
}

#[pymethods]
impl PyModelBall {
    #[new]
    #[pyo3(signature = (dim, radius, space_form = 0.0, warping = None, drift = "0"))]
    fn new(dim: usize, radius: f64, space_form: f64, warping: Option<&str>, drift: &str) -> PyResult<Self> {
        let rho = self::warping(space_form, warping)?;
        let drift = ds::DriftProfile::from_expression(drift).map_err(to_py)?;
        Ok(PyModelBall { inner: ds::ModelBall::new(dim, radius, rho, drift).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.r0
    }

    /// Returns `(lambda, t, values)` for the principal Dirichlet mode.
    #[pyo3(signature = (n_t = 512, tol = 1e-8))]
    fn principal(&self, py: Python<'_>, n_t: usize, tol: f64) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
        let mode = py
            .allow_threads(|| ds::principal_eigenpair(&self.inner, &ds::SolverOptions { n_t, tol }))
            .map_err(to_py)?;
        Ok((mode.lambda, mode.samples.t.clone(), mode.samples.values.clone()))
    }

    /// Returns `(lambda, k, i, multiplicity)` for every level below `cutoff`.
    #[pyo3(signature = (cutoff, n_t = 512, tol = 1e-8))]
    fn spectrum(&self, py: Python<'_>, cutoff: f64, n_t: usize, tol: f64) -> PyResult<Vec<(f64, usize, usize, u64)>> {
        let table = py
            .allow_threads(|| ds::assemble_spectrum(&self.inner, cutoff, &ds::SolverOptions { n_t, tol }))
            .map_err(to_py)?;
        Ok(table.entries.iter().map(|e| (e.lambda, e.k as usize, e.i as usize, e.multiplicity as u64)).collect())
    }

    /// Recovers the drift from the principal eigenfunction; returns `(t, h_recovered, sup_error)`.
    #[pyo3(signature = (n_t = 512))]
    fn riccati(&self, n_t: usize) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
        let opts = ds::RiccatiOptions { n_t, ..Default::default() };
        let r = ds::riccati_uniqueness(&self.inner, &opts).map_err(to_py)?;
        Ok((r.t.clone(), r.h_recovered.clone(), r.sup_error))
    }

    fn __repr__(&self) -> String {
        format!("ModelBall(dim={}, radius={}, drift={:?})", self.inner.m, self.inner.r0, self.inner.drift.label())
    }
}

#[allow(clippy::too_many_arguments)]
fn disk_problem(
    space_form: f64,
    radius: f64,
    n_t: usize,
    n_theta: usize,
    drift: &str,
    angular_drift: Option<&str>,
    perturbation: Option<&str>,
) -> PyResult<ds::DiskProblem> {
    let ball = ds::ModelBall::new(2, radius, warping(space_form, None)?, ds::DriftProfile::zero()).map_err(to_py)?;
    let grid = ds::PolarGrid::new(n_t, n_theta, radius).map_err(to_py)?;
    let perturbation: Option<MetricFn> = match perturbation {
        None => None,
        Some(src) => {
            let e = Expr::parse(src).map_err(to_py)?;
            let d1 = e.derivative(Var::T);
            let d2 = d1.derivative(Var::T);
            Some(Arc::new(move |t, th| [e.eval(t, th), d1.eval(t, th), d2.eval(t, th)]))
        }
    };
    let angular = match angular_drift {
        Some(src) => Some(Expr::parse(src).map_err(to_py)?.into_fn()),
        None => None,
    };
    let disk = build_model_disk(&ball, grid, perturbation, angular).map_err(to_py)?;
    let vt = Expr::parse(drift).map_err(to_py)?.into_fn();
    Ok(disk.with_drift(vt, disk.vtheta_fn()))
}

/// Principal eigenpair of a drift Laplacian on a perturbed two-dimensional disk.
#[pyfunction]
#[pyo3(signature = (space_form = 0.0, radius = 1.0, n_t = 96, n_theta = 64, drift = "0", angular_drift = None, perturbation = None, tol = 1e-8))]
#[allow(clippy::too_many_arguments)]
fn disk_principal<'py>(
    py: Python<'py>,
    space_form: f64,
    radius: f64,
    n_t: usize,
    n_theta: usize,
    drift: &str,
    angular_drift: Option<&str>,
    perturbation: Option<&str>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = disk_problem(space_form, radius, n_t, n_theta, drift, angular_drift, perturbation)?;
    let pair = py
        .allow_threads(|| ds::principal_eigenpair_2d(&ds::DiskOperator::new(&p), 0.0, tol))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lambda", pair.lambda)?;
    d.set_item("residual", pair.residual)?;
    d.set_item("iterations", pair.iterations)?;
    d.set_item("angular_std", pair.angular_std())?;
    d.set_item("omega", pair.omega.clone())?;
    Ok(d)
}

/// Barta bracket and Holland bound for the paraboloid trial function on a disk.
#[pyfunction]
#[pyo3(signature = (space_form = 0.0, radius = 1.0, n_t = 96, n_theta = 64, drift = "0", angular_drift = None, perturbation = None, tol = 1e-8))]
#[allow(clippy::too_many_arguments)]
fn bounds<'py>(
    py: Python<'py>,
    space_form: f64,
    radius: f64,
    n_t: usize,
    n_theta: usize,
    drift: &str,
    angular_drift: Option<&str>,
    perturbation: Option<&str>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = disk_problem(space_form, radius, n_t, n_theta, drift, angular_drift, perturbation)?;
    let op = ds::DiskOperator::new(&p);
    let (fwd, _) = principal_and_adjoint(&op, tol).map_err(to_py)?;
    let trial = p.grid.sample(|t, _| radius * radius - t * t);
    let bracket = ds::variational::barta_bracket(&op, &trial).map_err(to_py)?;
    let holland = ds::variational::holland_bound(&p, &op, &trial).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lambda", fwd.lambda)?;
    d.set_item("barta_lower", bracket.lower)?;
    d.set_item("barta_upper", bracket.upper)?;
    d.set_item("holland", holland.bound)?;
    Ok(d)
}

/// Runs the built-in comparison corpus; one dict per case.
#[pyfunction]
#[pyo3(signature = (workers = 4))]
fn compare_corpus<'py>(py: Python<'py>, workers: usize) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cases = ds::shipped_corpus();
    let opts = ds::ComparisonOptions::default();
    let results = py.allow_threads(|| ds::run_batch(&cases, &opts, workers));
    results
        .into_iter()
        .map(|r| {
            let v = r.map_err(to_py)?;
            let d = PyDict::new(py);
            d.set_item("case_id", &v.case_id)?;
            d.set_item("mode", v.mode.name())?;
            d.set_item("premises_hold", v.premises_hold)?;
            d.set_item("lambda_subject", v.lambda_subject)?;
            d.set_item("lambda_model", v.lambda_model)?;
            d.set_item("conclusion_holds", v.conclusion_holds)?;
            d.set_item("equality_case", v.equality_case)?;
            d.set_item("violation", v.is_violation())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "drift_spectra")]
fn drift_spectra_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelBall>()?;
    m.add_function(wrap_pyfunction!(disk_principal, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(compare_corpus, m)?)?;
    Ok(())
}
