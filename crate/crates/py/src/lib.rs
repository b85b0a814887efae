//! Python bindings. Structured results cross the boundary as plain Python
//! dicts and lists produced from the library's JSON form.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use umskel::chaining::{self, PhiFunction};
use umskel::skeleton::{self, SkeletonConfig};
use umskel::{gaussian, submeasure, union, FiniteMetricSpace, MeasureVec, UltrametricTree, WeightedSpace};

create_exception!(umskel_py, UmskelError, PyException);

fn err(e: umskel::Error) -> PyErr {
    UmskelError::new_err(format!("{}: {e}", e.kind()))
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| err(e.into()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn tree_from_py(obj: &Bound<'_, PyAny>) -> PyResult<UltrametricTree> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| err(e.into()))
}

/// A finite metric space given by its distance matrix.
#[pyclass(name = "MetricSpace", module = "umskel_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMetricSpace {
    inner: FiniteMetricSpace,
}

#[pymethods]
impl PyMetricSpace {
    #[new]
    #[pyo3(signature = (dist, labels=None, tol=umskel::DEFAULT_TOLERANCE))]
    fn new(dist: Vec<Vec<f64>>, labels: Option<Vec<String>>, tol: f64) -> PyResult<Self> {
        let labels = labels.unwrap_or_else(|| (0..dist.len()).map(|i| i.to_string()).collect());
        let inner = FiniteMetricSpace::with_tolerance(labels, dist, tol).map_err(err)?;
        Ok(PyMetricSpace { inner })
    }

    #[staticmethod]
    fn from_points(points: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyMetricSpace { inner: FiniteMetricSpace::from_points(&points).map_err(err)? })
    }

    #[staticmethod]
    fn path(m: usize) -> Self {
        PyMetricSpace { inner: umskel::generators::path_metric(m) }
    }

    #[staticmethod]
    fn equilateral(n: usize) -> Self {
        PyMetricSpace { inner: umskel::generators::equilateral(n) }
    }

    #[staticmethod]
    fn star(n: usize) -> Self {
        PyMetricSpace { inner: umskel::generators::star_metric(n) }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("MetricSpace(n={})", self.inner.len())
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn d(&self, i: usize, j: usize) -> PyResult<f64> {
        self.inner.check_point(i).and(self.inner.check_point(j)).map_err(err)?;
        Ok(self.inner.d(i, j))
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.matrix()
    }

    fn closed_ball(&self, x: usize, r: f64) -> PyResult<Vec<usize>> {
        self.inner.closed_ball(x, r).map_err(err)
    }

    fn diameter(&self) -> f64 {
        self.inner.diameter(&self.inner.all_points())
    }

    fn restrict(&self, subset: Vec<usize>) -> PyResult<Self> {
        Ok(PyMetricSpace { inner: self.inner.restrict(&subset).map_err(err)? })
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.to_json())
    }
}

fn weighted(space: &PyMetricSpace, mu: Option<Vec<f64>>) -> PyResult<WeightedSpace> {
    match mu {
        Some(w) => WeightedSpace::new(space.inner.clone(), MeasureVec::new(w).map_err(err)?).map_err(err),
        None => Ok(WeightedSpace::uniform(space.inner.clone())),
    }
}

/// Axiom report for a raw matrix; never raises on axiom failures.
#[pyfunction]
#[pyo3(signature = (dist, labels=None, tol=umskel::DEFAULT_TOLERANCE))]
fn validate_metric(py: Python<'_>, dist: Vec<Vec<f64>>, labels: Option<Vec<String>>, tol: f64) -> PyResult<Py<PyAny>> {
    let labels = labels.unwrap_or_else(|| (0..dist.len()).map(|i| i.to_string()).collect());
    to_py(py, &umskel::validate_metric(&labels, &dist, tol).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (space, points=None))]
fn subdominant_ultrametric(py: Python<'_>, space: &PyMetricSpace, points: Option<Vec<usize>>) -> PyResult<Py<PyAny>> {
    let points = points.unwrap_or_else(|| space.inner.all_points());
    to_py(py, &umskel::subdominant_ultrametric_on(&space.inner, &points).map_err(err)?)
}

/// `(D*, tree)` for the whole space or a subset.
#[pyfunction]
#[pyo3(signature = (space, points=None))]
fn min_ultrametric_distortion(
    py: Python<'_>,
    space: &PyMetricSpace,
    points: Option<Vec<usize>>,
) -> PyResult<(f64, Py<PyAny>)> {
    let points = points.unwrap_or_else(|| space.inner.all_points());
    let (d, tree) = umskel::min_ultrametric_distortion_on(&space.inner, &points).map_err(err)?;
    Ok((d, to_py(py, &tree)?))
}

#[pyfunction]
fn certify(py: Python<'_>, space: &PyMetricSpace, tree: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    to_py(py, &umskel::certify(&space.inner, &tree_from_py(tree)?).map_err(err)?)
}

/// Merged ultrametric on `u1 ∪ u2`; side trees default to the optimal ones.
#[pyfunction]
#[pyo3(signature = (space, u1, u2, rho1=None, rho2=None, eps=union::DEFAULT_MERGE_EPS))]
fn union_ultrametric(
    py: Python<'_>,
    space: &PyMetricSpace,
    u1: Vec<usize>,
    u2: Vec<usize>,
    rho1: Option<&Bound<'_, PyAny>>,
    rho2: Option<&Bound<'_, PyAny>>,
    eps: f64,
) -> PyResult<Py<PyAny>> {
    let side = |points: &[usize], t: Option<&Bound<'_, PyAny>>| -> PyResult<UltrametricTree> {
        match t {
            Some(t) => tree_from_py(t),
            None => Ok(umskel::min_ultrametric_distortion_on(&space.inner, points).map_err(err)?.1),
        }
    };
    let t1 = side(&u1, rho1)?;
    let t2 = side(&u2, rho2)?;
    let out = union::union_ultrametric(&space.inner, &u1, &u2, Some(&t1), Some(&t2), eps).map_err(err)?;
    to_py(py, &out)
}

#[pyfunction]
fn make_line_example(py: Python<'_>, m: usize, n: usize) -> PyResult<(PyMetricSpace, Py<PyAny>)> {
    let ex = union::make_line_example(m, n).map_err(err)?;
    Ok((PyMetricSpace { inner: ex.space.clone() }, to_py(py, &ex)?))
}

#[pyfunction]
#[pyo3(signature = (space, eps, subset, mu=None, c_eps=1.0, greedy=false))]
fn covering_submeasure(
    py: Python<'_>,
    space: &PyMetricSpace,
    eps: f64,
    subset: Vec<usize>,
    mu: Option<Vec<f64>>,
    c_eps: f64,
    greedy: bool,
) -> PyResult<Py<PyAny>> {
    let ws = weighted(space, mu)?;
    let sol = if greedy {
        submeasure::greedy_cover_bound(&ws, eps, c_eps, &subset)
    } else {
        submeasure::covering_submeasure(&ws, eps, c_eps, &subset)
    };
    to_py(py, &sol.map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (space, eps, mu=None, c_eps=1.0, heuristic=false))]
fn build_skeleton(
    py: Python<'_>,
    space: &PyMetricSpace,
    eps: f64,
    mu: Option<Vec<f64>>,
    c_eps: f64,
    heuristic: bool,
) -> PyResult<Py<PyAny>> {
    let ws = weighted(space, mu)?;
    let mut config = SkeletonConfig::new(eps);
    config.c_eps = c_eps;
    config.heuristic = heuristic;
    let sk = py.detach(|| skeleton::build_skeleton_with(&ws, &config)).map_err(err)?;
    to_py(py, &sk)
}

#[pyfunction]
fn dvoretzky_check(py: Python<'_>, space: &PyMetricSpace, eps: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &skeleton::dvoretzky_check(&space.inner, eps).map_err(err)?)
}

/// Per-point values of `∫ √ln(1/μ(B(x, r))) dr`.
#[pyfunction]
fn profile(py: Python<'_>, space: &PyMetricSpace, mu: Vec<f64>) -> PyResult<Py<PyAny>> {
    let mu = MeasureVec::new(mu).map_err(err)?;
    to_py(py, &chaining::profile(&space.inner, &mu, &PhiFunction::phi2()).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (space, tol=1e-8, max_iter=2000))]
fn equalizing_measure(py: Python<'_>, space: &PyMetricSpace, tol: f64, max_iter: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &chaining::equalizing_measure(&space.inner, &PhiFunction::phi2(), tol, max_iter).map_err(err)?)
}

#[pyfunction]
fn gamma_delta_grid(py: Python<'_>, space: &PyMetricSpace, resolution: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &chaining::gamma_delta_grid(&space.inner, &PhiFunction::phi2(), resolution).map_err(err)?)
}

#[pyfunction]
fn star_report(py: Python<'_>, n: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &chaining::star_report(n).map_err(err)?)
}

/// Takes the dict returned by [`build_skeleton`].
#[pyfunction]
fn majorizing_chain_check(py: Python<'_>, space: &PyMetricSpace, skeleton: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (skeleton,))?.extract()?;
    let sk: skeleton::SkeletonResult = serde_json::from_str(&text).map_err(|e| err(e.into()))?;
    let ws = WeightedSpace::new(space.inner.clone(), sk.mu.clone()).map_err(err)?;
    to_py(py, &chaining::majorizing_chain_check(&ws, &sk).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (points, seed, trials, eval_trials=None))]
fn gaussian_argmax_experiment(
    py: Python<'_>,
    points: Vec<Vec<f64>>,
    seed: u64,
    trials: usize,
    eval_trials: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let mut cfg = gaussian::ExperimentConfig::new(seed, trials);
    cfg.eval_trials = eval_trials;
    let report = py.detach(|| gaussian::gaussian_argmax_experiment(&points, &cfg)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn umskel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("UmskelError", m.py().get_type::<UmskelError>())?;
    m.add_class::<PyMetricSpace>()?;
    m.add_function(wrap_pyfunction!(validate_metric, m)?)?;
    m.add_function(wrap_pyfunction!(subdominant_ultrametric, m)?)?;
    m.add_function(wrap_pyfunction!(min_ultrametric_distortion, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(union_ultrametric, m)?)?;
    m.add_function(wrap_pyfunction!(make_line_example, m)?)?;
    m.add_function(wrap_pyfunction!(covering_submeasure, m)?)?;
    m.add_function(wrap_pyfunction!(build_skeleton, m)?)?;
    m.add_function(wrap_pyfunction!(dvoretzky_check, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(equalizing_measure, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_delta_grid, m)?)?;
    m.add_function(wrap_pyfunction!(star_report, m)?)?;
    m.add_function(wrap_pyfunction!(majorizing_chain_check, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_argmax_experiment, m)?)?;
    Ok(())
}
