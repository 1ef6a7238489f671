//! Python bindings for the norm-angle library.
//!
//! Exposes the expression type as a `Norm` class plus the main operations
//! (evaluation, duals, g-functionals, norm angles, planar boundary analysis,
//! equivalence scans, divergence probes, vertex detection and convexity
//! moduli) as module functions returning plain Python structures.

use normangle::equiv::{self, ProbeSchedule, ScanConfig};
use normangle::error::Error;
use normangle::geometry;
use normangle::gfunc::{self, GOptions, GPair, Side};
use normangle::norms::{self, NormExpr, Vector};
use normangle::plane;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(coords: Vec<f64>) -> PyResult<Vector> {
    Vector::new(coords).map_err(err)
}

fn side(tag: &str) -> PyResult<Side> {
    match tag {
        "+" | "plus" => Ok(Side::Plus),
        "-" | "minus" => Ok(Side::Minus),
        other => Err(PyValueError::new_err(format!("side must be '+' or '-', got '{other}'"))),
    }
}

/// A norm on R^n, described by the expression grammar
/// (`lp(p, w=[...])`, `quad([[...]])`, `sum(...)`, `max(...)`,
/// `scale(c, ...)`, `polygon([[x, y], ...])`, `dual(...)`).
#[pyclass(module = "normangle_py", skip_from_py_object)]
#[derive(Clone)]
struct Norm {
    inner: NormExpr,
}

#[pymethods]
impl Norm {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Norm { inner: norms::parse_norm(text).map_err(err)? })
    }

    /// Dimension of the underlying space; None for dimension-polymorphic lp.
    fn dim(&self) -> Option<usize> {
        self.inner.dim()
    }

    /// `||x||` for this norm.
    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        norms::evaluate(&self.inner, &vector(x)?).map_err(err)
    }

    /// Closed-form dual norm (lp / quad / polygon / scale chains).
    fn dualize(&self) -> PyResult<Norm> {
        Ok(Norm { inner: norms::dualize(&self.inner).map_err(err)? })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Norm(\"{}\")", self.inner)
    }
}

fn gpair_dict<'py>(py: Python<'py>, pair: &GPair) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("g_minus", pair.g_minus)?;
    d.set_item("g_plus", pair.g_plus)?;
    d.set_item("g", pair.g)?;
    d.set_item("cos_theta", pair.cos_theta)?;
    d.set_item("tan_half_sq", pair.tan_half_sq)?;
    d.set_item("bracket_width", pair.bracket_width)?;
    d.set_item(
        "method",
        match pair.method {
            gfunc::Method::Analytic => "analytic",
            gfunc::Method::Numeric => "numeric",
        },
    )?;
    Ok(d)
}

/// `(||x + t y|| - ||x||) / t`.
#[pyfunction]
fn diff_quotient(n: PyRef<Norm>, x: Vec<f64>, y: Vec<f64>, t: f64) -> PyResult<f64> {
    gfunc::diff_quotient(&n.inner, &vector(x)?, &vector(y)?, t).map_err(err)
}

/// One-sided g-functional; returns `(value, error_bound)`.
#[pyfunction]
fn g_one_sided(n: PyRef<Norm>, x: Vec<f64>, y: Vec<f64>, side_tag: &str) -> PyResult<(f64, f64)> {
    gfunc::g_one_sided(&n.inner, &vector(x)?, &vector(y)?, side(side_tag)?).map_err(err)
}

/// Full g-functional query as a dict.
#[pyfunction]
#[pyo3(signature = (n, x, y, force_numeric = false))]
fn g_functional<'py>(
    py: Python<'py>,
    n: PyRef<Norm>,
    x: Vec<f64>,
    y: Vec<f64>,
    force_numeric: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = GOptions { force_numeric, ..GOptions::default() };
    let pair = gfunc::g_functional_with(&n.inner, &vector(x)?, &vector(y)?, &opts).map_err(err)?;
    gpair_dict(py, &pair)
}

/// Norm angle `(theta, tan_half)`.
#[pyfunction]
fn norm_angle(n: PyRef<Norm>, x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
    gfunc::norm_angle(&n.inner, &vector(x)?, &vector(y)?).map_err(err)
}

/// Polar radius `r(t)` of a planar unit ball.
#[pyfunction]
fn radial(n: PyRef<Norm>, t: f64) -> PyResult<f64> {
    plane::radial(&n.inner, t).map_err(err)
}

/// Boundary comparison angle `sigma(alpha, beta)`.
#[pyfunction]
fn sigma(n: PyRef<Norm>, alpha: f64, beta: f64) -> PyResult<f64> {
    plane::sigma(&n.inner, alpha, beta).map_err(err)
}

/// One-sided limits `(phi_minus, phi_plus, width)` of sigma at alpha.
#[pyfunction]
fn phi_pair(n: PyRef<Norm>, alpha: f64) -> PyResult<(f64, f64, f64)> {
    let p = plane::phi_pair(&n.inner, alpha).map_err(err)?;
    Ok((p.phi_minus, p.phi_plus, p.width))
}

/// Closed planar g/angle formulas for boundary directions.
#[pyfunction]
#[pyo3(signature = (n, alpha, beta, a = 1.0, b = 1.0))]
fn g_planar<'py>(
    py: Python<'py>,
    n: PyRef<Norm>,
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let pair = plane::g_planar(&n.inner, alpha, beta, a, b).map_err(err)?;
    gpair_dict(py, &pair)
}

/// Sampled polar profile: grid angles, radii, refined extremes.
#[pyfunction]
#[pyo3(signature = (n, grid = 720))]
fn polar_profile<'py>(py: Python<'py>, n: PyRef<Norm>, grid: usize) -> PyResult<Bound<'py, PyDict>> {
    let profile = plane::PolarProfile::sample(&n.inner, grid).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("t", profile.grid().to_vec())?;
    d.set_item("r", profile.r_values().to_vec())?;
    d.set_item("r_min", profile.r_min())?;
    d.set_item("r_max", profile.r_max())?;
    Ok(d)
}

/// `tan(theta_2/2) / tan(theta_1/2)`, or None when undefined.
#[pyfunction]
fn tan_ratio(n1: PyRef<Norm>, n2: PyRef<Norm>, x: Vec<f64>, y: Vec<f64>) -> PyResult<Option<f64>> {
    equiv::tan_ratio(&n1.inner, &n2.inner, &vector(x)?, &vector(y)?).map_err(err)
}

/// Scan the angular-equivalence constant; returns the full report as a dict.
#[pyfunction]
#[pyo3(signature = (n1, n2, dim = 2, seed = 0, grid = 720, samples = 10_000, refine_rounds = 3))]
#[allow(clippy::too_many_arguments)]
fn scan_constant<'py>(
    py: Python<'py>,
    n1: PyRef<Norm>,
    n2: PyRef<Norm>,
    dim: usize,
    seed: u64,
    grid: usize,
    samples: usize,
    refine_rounds: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ScanConfig { grid, samples, refine_rounds, seed, ..ScanConfig::default() };
    let report = equiv::scan_constant(&n1.inner, &n2.inner, dim, &cfg).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("c_hat", report.c_hat)?;
    d.set_item(
        "witness",
        (report.witness.0.coords().to_vec(), report.witness.1.coords().to_vec()),
    )?;
    d.set_item("m_hat", report.m_hat)?;
    d.set_item("M_hat", report.big_m_hat)?;
    d.set_item("diverging", report.diverging)?;
    d.set_item("schedule", report.divergence_schedule.clone())?;
    d.set_item("seed", report.seed)?;
    d.set_item("samples_used", report.samples_used)?;
    Ok(d)
}

/// Sampled topological constants `(m_hat, M_hat)`.
#[pyfunction]
#[pyo3(signature = (n1, n2, dim = 2, samples = 720))]
fn topological_constants(
    n1: PyRef<Norm>,
    n2: PyRef<Norm>,
    dim: usize,
    samples: usize,
) -> PyResult<(f64, f64)> {
    equiv::topological_constants(&n1.inner, &n2.inner, dim, samples).map_err(err)
}

/// Sharp angular constant `M/m` for two quad norms.
#[pyfunction]
fn wielandt_bound(n1: PyRef<Norm>, n2: PyRef<Norm>) -> PyResult<f64> {
    equiv::wielandt_bound(&n1.inner, &n2.inner).map_err(err)
}

/// Ratio schedule along `y = u + s v`; returns `(schedule, diverging)`.
#[pyfunction]
#[pyo3(signature = (n1, n2, u, v, s0 = 0.1, factor = 0.1, steps = 5))]
#[allow(clippy::too_many_arguments)]
fn divergence_probe(
    n1: PyRef<Norm>,
    n2: PyRef<Norm>,
    u: Vec<f64>,
    v: Vec<f64>,
    s0: f64,
    factor: f64,
    steps: usize,
) -> PyResult<(Vec<(f64, f64)>, bool)> {
    let schedule = ProbeSchedule { s0, factor, steps };
    let ratios =
        equiv::divergence_probe(&n1.inner, &n2.inner, &vector(u)?, &vector(v)?, &schedule)
            .map_err(err)?;
    let verdict = equiv::diverging_verdict(&ratios);
    Ok((ratios, verdict))
}

/// Residual of the sum rule for `n3 = sum(n1, n2)`.
#[pyfunction]
fn check_sum_identity(
    n1: PyRef<Norm>,
    n2: PyRef<Norm>,
    x: Vec<f64>,
    y: Vec<f64>,
) -> PyResult<f64> {
    equiv::check_sum_identity(&n1.inner, &n2.inner, &vector(x)?, &vector(y)?).map_err(err)
}

/// Chord-midpoint flatness probe of a planar boundary.
#[pyfunction]
fn flatness(n: PyRef<Norm>, alpha: f64, h: f64) -> PyResult<f64> {
    geometry::flatness(&n.inner, alpha, h).map_err(err)
}

/// Corner rays and flat faces of a planar unit ball.
#[pyfunction]
#[pyo3(signature = (n, tol = 1e-3))]
fn vertex_angles<'py>(py: Python<'py>, n: PyRef<Norm>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let rays = geometry::vertex_angles(&n.inner, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("vertex_angles", rays.vertex_angles)?;
    d.set_item("flat_intervals", rays.flat_intervals)?;
    d.set_item("tol", rays.tol)?;
    Ok(d)
}

/// Match the corner rays of two planar balls within `tol`.
#[pyfunction]
#[pyo3(signature = (n1, n2, tol = 1e-3))]
fn compare_extreme_rays<'py>(
    py: Python<'py>,
    n1: PyRef<Norm>,
    n2: PyRef<Norm>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cmp = geometry::compare_extreme_rays(&n1.inner, &n2.inner, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("matched", cmp.matched)?;
    d.set_item("unmatched_first", cmp.unmatched_first)?;
    d.set_item("unmatched_second", cmp.unmatched_second)?;
    d.set_item("consistent", cmp.consistent)?;
    Ok(d)
}

/// Search for a flat-pair witness; None means none found at this tolerance.
#[pyfunction]
#[pyo3(signature = (n, dim = 2, samples = 20_000, tol = 1e-9, seed = 0))]
fn strict_convexity_witness(
    n: PyRef<Norm>,
    dim: usize,
    samples: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Option<(Vec<f64>, Vec<f64>)>> {
    let witness =
        geometry::strict_convexity_witness(&n.inner, dim, samples, tol, seed).map_err(err)?;
    Ok(witness.map(|(a, b)| (a.coords().to_vec(), b.coords().to_vec())))
}

/// Sampled convexity modulus table `[(eps, delta(eps)), ...]`.
#[pyfunction]
#[pyo3(signature = (n, dim = 2, eps_grid = vec![0.1, 0.25, 0.5, 1.0, 1.5], samples = 720, seed = 0))]
fn convexity_modulus(
    n: PyRef<Norm>,
    dim: usize,
    eps_grid: Vec<f64>,
    samples: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    geometry::convexity_modulus(&n.inner, dim, &eps_grid, samples, seed).map_err(err)
}

/// Sampled angle modulus table `[(eps, delta_theta(eps)), ...]`.
#[pyfunction]
#[pyo3(signature = (n, dim = 2, eps_grid = vec![0.1, 0.25, 0.5, 1.0, 1.5], samples = 720, seed = 0))]
fn angle_modulus(
    n: PyRef<Norm>,
    dim: usize,
    eps_grid: Vec<f64>,
    samples: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    geometry::angle_modulus(&n.inner, dim, &eps_grid, samples, seed).map_err(err)
}

#[pymodule]
fn normangle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Norm>()?;
    m.add_function(wrap_pyfunction!(diff_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(g_one_sided, m)?)?;
    m.add_function(wrap_pyfunction!(g_functional, m)?)?;
    m.add_function(wrap_pyfunction!(norm_angle, m)?)?;
    m.add_function(wrap_pyfunction!(radial, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(phi_pair, m)?)?;
    m.add_function(wrap_pyfunction!(g_planar, m)?)?;
    m.add_function(wrap_pyfunction!(polar_profile, m)?)?;
    m.add_function(wrap_pyfunction!(tan_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(scan_constant, m)?)?;
    m.add_function(wrap_pyfunction!(topological_constants, m)?)?;
    m.add_function(wrap_pyfunction!(wielandt_bound, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_probe, m)?)?;
    m.add_function(wrap_pyfunction!(check_sum_identity, m)?)?;
    m.add_function(wrap_pyfunction!(flatness, m)?)?;
    m.add_function(wrap_pyfunction!(vertex_angles, m)?)?;
    m.add_function(wrap_pyfunction!(compare_extreme_rays, m)?)?;
    m.add_function(wrap_pyfunction!(strict_convexity_witness, m)?)?;
    m.add_function(wrap_pyfunction!(convexity_modulus, m)?)?;
    m.add_function(wrap_pyfunction!(angle_modulus, m)?)?;
    Ok(())
}
