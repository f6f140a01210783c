//! Python module `crsphere_py`: geometry of the CR sphere and Heisenberg
//! group, sharp constants, and the Beckner-Onofri / log-HLS / eigenvalue
//! computations.
//!
//! Weights and densities are passed as strings: `"one"`, `"jacobian:<s>"`
//! (axial conformal Jacobian) or `"random:<amp>"` (seeded smooth weight).

use crsphere::adams;
use crsphere::functionals as fx;
use crsphere::geometry as geo;
use crsphere::harmonics::ZonalPluriharmonic as CoreZonal;
use crsphere::quadrature::{DiskRule, SphereRule};
use crsphere::{sample, spectral, Error, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

enum Weight {
    One,
    Jacobian(geo::JacobianProfile),
    Random(fx::SmoothWeight),
}

impl Weight {
    fn parse(spec: &str, n: usize, seed: u64) -> PyResult<Self> {
        if spec == "one" {
            return Ok(Weight::One);
        }
        let bad = || PyValueError::new_err(format!("expected one, jacobian:<s> or random:<amp>, got {spec}"));
        let (kind, val) = spec.split_once(':').ok_or_else(bad)?;
        let v: f64 = val.parse().map_err(|_| bad())?;
        match kind {
            "jacobian" => Ok(Weight::Jacobian(geo::JacobianProfile::axial(n, C64::new(v, 0.0)).map_err(err)?)),
            "random" if v >= 0.0 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(Weight::Random(sample::smooth_weight(&mut rng, n, v)))
            }
            _ => Err(bad()),
        }
    }

    fn eval(&self, p: &geo::SpherePoint) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Jacobian(j) => j.eval(p),
            Weight::Random(w) => w.eval(p),
        }
    }
}

/// Point `(z, t)` of the Heisenberg group.
#[pyclass(name = "HeisenbergPoint", from_py_object)]
#[derive(Clone)]
struct PyHeisenbergPoint(geo::HeisenbergPoint);

#[pymethods]
impl PyHeisenbergPoint {
    #[new]
    fn new(z: Vec<C64>, t: f64) -> Self {
        Self(geo::HeisenbergPoint::new(z, t))
    }

    #[getter]
    fn z(&self) -> Vec<C64> {
        self.0.z.clone()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        geo::heis_mul(&self.0, &other.0).map(Self).map_err(err)
    }

    fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    /// Gauge norm `(|z|⁴ + t²)^{1/4}`.
    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn dist(&self, other: &Self) -> PyResult<f64> {
        geo::heis_dist(&self.0, &other.0).map_err(err)
    }

    fn cayley(&self) -> PySpherePoint {
        PySpherePoint(geo::cayley(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("HeisenbergPoint(z={:?}, t={})", self.0.z, self.0.t)
    }
}

/// Point of `S^{2n+1} ⊂ ℂ^{n+1}`.
#[pyclass(name = "SpherePoint", from_py_object)]
#[derive(Clone)]
struct PySpherePoint(geo::SpherePoint);

#[pymethods]
impl PySpherePoint {
    #[new]
    fn new(zeta: Vec<C64>) -> PyResult<Self> {
        geo::SpherePoint::new(zeta).map(Self).map_err(err)
    }

    #[getter]
    fn zeta(&self) -> Vec<C64> {
        self.0.zeta.clone()
    }

    /// `|1 - ζ·η̄|^{1/2}`.
    fn dist(&self, other: &Self) -> f64 {
        geo::sphere_dist(&self.0, &other.0)
    }

    fn cayley_inv(&self) -> PyResult<PyHeisenbergPoint> {
        geo::cayley_inv(&self.0).map(PyHeisenbergPoint).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("SpherePoint({:?})", self.0.zeta)
    }
}

/// Word in the generators of the conformal group, acting on both models.
#[pyclass(name = "ConformalMap", from_py_object)]
#[derive(Clone)]
struct PyConformalMap(geo::ConformalMap);

#[pymethods]
impl PyConformalMap {
    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(geo::ConformalMap::identity(n))
    }

    #[staticmethod]
    fn dilation(n: usize, delta: f64) -> PyResult<Self> {
        geo::ConformalMap::dilation(n, delta).map(Self).map_err(err)
    }

    #[staticmethod]
    fn translation(z: Vec<C64>, t: f64) -> PyResult<Self> {
        let n = z.len();
        geo::ConformalMap::new(n, vec![geo::Generator::Translation { z, t }]).map(Self).map_err(err)
    }

    #[staticmethod]
    fn inversion(n: usize) -> PyResult<Self> {
        geo::ConformalMap::new(n, vec![geo::Generator::Inversion]).map(Self).map_err(err)
    }

    #[staticmethod]
    fn random(n: usize, max_len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self(sample::conformal_word(&mut rng, n, max_len))
    }

    /// `self` followed by `other`.
    fn then(&self, other: &Self) -> PyResult<Self> {
        self.0.then(&other.0).map(Self).map_err(err)
    }

    fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    /// Image and Jacobian density on the sphere.
    fn apply(&self, p: &PySpherePoint) -> PyResult<(PySpherePoint, f64)> {
        let (q, j) = self.0.apply_with_jacobian(&p.0).map_err(err)?;
        Ok((PySpherePoint(q), j))
    }

    /// Image and Jacobian on the Heisenberg group.
    fn apply_heis(&self, u: &PyHeisenbergPoint) -> PyResult<(PyHeisenbergPoint, f64)> {
        let (v, j) = self.0.apply_heis(&u.0).map_err(err)?;
        Ok((PyHeisenbergPoint(v), j))
    }

    fn jacobian(&self, p: &PySpherePoint) -> PyResult<f64> {
        self.0.jacobian(&p.0).map_err(err)
    }
}

/// `F(w) = a_0 + 2 Re Σ_{j≥1} a_j w^j` with `w = ζ_{n+1}`.
#[pyclass(name = "ZonalPluriharmonic", from_py_object)]
#[derive(Clone)]
struct PyZonal(CoreZonal);

#[pymethods]
impl PyZonal {
    #[new]
    fn new(n: usize, coeffs: Vec<C64>) -> PyResult<Self> {
        CoreZonal::new(n, coeffs).map(Self).map_err(err)
    }

    #[staticmethod]
    fn random(n: usize, degree: usize, max_norm: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self(sample::zonal_pluri(&mut rng, n, degree, max_norm))
    }

    /// `log|J_τ|` for the axial profile `ω = s N`, truncated at degree `jmax`.
    #[staticmethod]
    fn log_jacobian(n: usize, s: C64, jmax: usize) -> PyResult<Self> {
        fx::log_jacobian_extremal(n, s, jmax).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn coeffs(&self) -> Vec<C64> {
        self.0.a.clone()
    }

    fn __call__(&self, w: C64) -> f64 {
        self.0.eval_w(w)
    }

    /// Beckner-Onofri functional: `(value, quadratic, mean, log_exp)`.
    #[pyo3(signature = (n_r = 96, n_ang = 128))]
    fn functional(&self, py: Python<'_>, n_r: usize, n_ang: usize) -> PyResult<(f64, f64, f64, f64)> {
        let f = self.0.clone();
        let r = py
            .detach(move || DiskRule::new(f.n, n_r, n_ang).and_then(|rule| fx::eval_j(&f, &rule)))
            .map_err(err)?;
        Ok((r.value, r.quadratic_term, r.mean_term, r.log_exp_term))
    }

    #[pyo3(signature = (n_r = 96, n_ang = 128))]
    fn gradient(&self, py: Python<'_>, n_r: usize, n_ang: usize) -> PyResult<Vec<f64>> {
        let f = self.0.clone();
        py.detach(move || DiskRule::new(f.n, n_r, n_ang).and_then(|rule| fx::gradient(&f, &rule)))
            .map_err(err)
    }

    #[pyo3(signature = (n_r = 160, n_ang = 320))]
    fn euler_lagrange_residual(&self, py: Python<'_>, n_r: usize, n_ang: usize) -> PyResult<f64> {
        let f = self.0.clone();
        py.detach(move || DiskRule::new(f.n, n_r, n_ang).and_then(|rule| fx::euler_lagrange_residual(&f, &rule)))
            .map_err(err)
    }

    /// Least-squares fit to the `log|J_τ|` family: `(s, relative_residual)`.
    fn fit_log_jacobian(&self) -> (C64, f64) {
        let fit = fx::fit_log_jacobian(&self.0);
        (fit.s, fit.relative_residual)
    }

    fn __repr__(&self) -> String {
        format!("ZonalPluriharmonic(n={}, coeffs={:?})", self.0.n, self.0.a)
    }
}

/// Minimize the Beckner-Onofri functional from `init`:
/// `(minimizer, value, grad_norm, converged, iterations)`.
#[pyfunction]
#[pyo3(signature = (init, n_r = 48, n_ang = 64, gtol = 1e-9, max_iter = 5000))]
fn minimize(
    py: Python<'_>,
    init: &PyZonal,
    n_r: usize,
    n_ang: usize,
    gtol: f64,
    max_iter: usize,
) -> PyResult<(PyZonal, f64, f64, bool, usize)> {
    let f = init.0.clone();
    let opts = fx::MinimizeOptions { gtol, max_iter, ..Default::default() };
    let r = py
        .detach(move || DiskRule::new(f.n, n_r, n_ang).and_then(|rule| fx::minimize_j(&f, &rule, &opts)))
        .map_err(err)?;
    Ok((PyZonal(r.minimizer), r.report.value, r.grad_norm, r.converged, r.trace.len()))
}

/// Weighted eigenvalues of the conditional intertwinor: `(eigenvalues, hersch_sum)`.
#[pyfunction]
#[pyo3(signature = (n, weight = "one", seed = 0, jmax = None, quad_sphere = None))]
fn eigen(
    py: Python<'_>,
    n: usize,
    weight: &str,
    seed: u64,
    jmax: Option<usize>,
    quad_sphere: Option<usize>,
) -> PyResult<(Vec<f64>, f64)> {
    let w = Weight::parse(weight, n, seed)?;
    let jmax = jmax.unwrap_or(if n == 1 { 12 } else { 4 });
    let m = quad_sphere.unwrap_or(if n == 1 { 40 } else { 12 });
    let r = py
        .detach(move || SphereRule::new(n, m).and_then(|rule| fx::eigen_aqprime_w(|p| w.eval(p), &rule, jmax)))
        .map_err(err)?;
    let h = fx::hersch_sum(&r);
    Ok((r.eigenvalues, h))
}

/// Log-HLS functional of a density: `(entropy, energy, gap)`.
#[pyfunction]
#[pyo3(signature = (n, density = "one", seed = 0, jmax = 16, quad_sphere = None))]
fn log_hls(
    py: Python<'_>,
    n: usize,
    density: &str,
    seed: u64,
    jmax: usize,
    quad_sphere: Option<usize>,
) -> PyResult<(f64, f64, f64)> {
    let w = Weight::parse(density, n, seed)?;
    let m = quad_sphere.unwrap_or(if n == 1 { 32 } else { 16 });
    let r = py
        .detach(move || SphereRule::new(n, m).and_then(|rule| fx::eval_log_hls(|p| w.eval(p), &rule, jmax)))
        .map_err(err)?;
    Ok((r.entropy, r.energy, r.gap))
}

/// Sharp constant `A_{Q/2}` for the conformal sublaplacian.
#[pyfunction]
fn adams_sublap(n: usize) -> PyResult<f64> {
    adams::adams_sublap_series(n).map(|a| a.value).map_err(err)
}

#[pyfunction]
fn adams_lab(a: f64, b: f64, n: usize) -> PyResult<f64> {
    adams::adams_lab(a, b, n).map(|c| c.value).map_err(err)
}

#[pyfunction]
fn a_n_lambda(lambda: f64, n: usize) -> PyResult<f64> {
    adams::a_n_lambda(lambda, n).map_err(err)
}

#[pyfunction]
fn k_n(n: usize) -> PyResult<f64> {
    adams::k_n(n).map_err(err)
}

#[pyfunction]
fn c_d(d: f64, n: usize) -> PyResult<f64> {
    spectral::c_d(d, n).map_err(err)
}

#[pyfunction]
fn heisenberg_c_d(d: f64, n: usize) -> PyResult<f64> {
    spectral::heisenberg_c_d(d, n).map_err(err)
}

/// Eigenvalue `λ_j(d)` of the intertwining operator on `H_{j,·}`.
#[pyfunction]
fn lambda_d(j: usize, d: f64, n: usize) -> PyResult<f64> {
    spectral::lambda_d(j, d, n).map_err(err)
}

#[pyfunction]
fn sphere_volume(n: usize) -> f64 {
    crsphere::sphere_volume(n)
}

#[pymodule]
fn crsphere_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHeisenbergPoint>()?;
    m.add_class::<PySpherePoint>()?;
    m.add_class::<PyConformalMap>()?;
    m.add_class::<PyZonal>()?;
    for f in [
        wrap_pyfunction!(minimize, m)?,
        wrap_pyfunction!(eigen, m)?,
        wrap_pyfunction!(log_hls, m)?,
        wrap_pyfunction!(adams_sublap, m)?,
        wrap_pyfunction!(adams_lab, m)?,
        wrap_pyfunction!(a_n_lambda, m)?,
        wrap_pyfunction!(k_n, m)?,
        wrap_pyfunction!(c_d, m)?,
        wrap_pyfunction!(heisenberg_c_d, m)?,
        wrap_pyfunction!(lambda_d, m)?,
        wrap_pyfunction!(sphere_volume, m)?,
    ] {
        m.add_function(f)?;
    }
    Ok(())
}
