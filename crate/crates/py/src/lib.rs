//! Python bindings for `volkov-core`. Points are passed as `(t, x1, x2, z)`
//! tuples and complex values come back as Python `complex`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use volkov_core::geometry::classify_default;
use volkov_core::goursat as core_goursat;
use volkov_core::potentials::{self as core_potentials, big_k_squared};
use volkov_core::propagators as core_propagators;
use volkov_core::quadrature as core_quadrature;
use volkov_core::special_functions as sf;
use volkov_core::{Error, PhysicalConstants, PotentialSpec, SpacetimePoint, TabulatedPotential};

type Point = (f64, f64, f64, f64);
/// `(n, h, max_error, order)` per refinement level.
type StudyRow = (usize, f64, f64, Option<f64>);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Quadrature { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point((t, x1, x2, z): Point) -> SpacetimePoint {
    SpacetimePoint::new(t, x1, x2, z)
}

/// Units and physical parameters; `k0` is the inverse Compton length.
#[pyclass(name = "Constants", frozen, get_all, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyConstants {
    e: f64,
    k0: f64,
    c: f64,
    hbar: f64,
}

impl PyConstants {
    fn inner(&self) -> PhysicalConstants {
        PhysicalConstants { c: self.c, hbar: self.hbar, e: self.e, k0: self.k0 }
    }
}

#[pymethods]
impl PyConstants {
    #[new]
    #[pyo3(signature = (e = 0.0, k0 = 1.0, c = 1.0, hbar = 1.0))]
    fn new(e: f64, k0: f64, c: f64, hbar: f64) -> PyResult<Self> {
        let k = Self { e, k0, c, hbar };
        k.inner().validate().map_err(to_py)?;
        Ok(k)
    }

    fn coupling(&self) -> f64 {
        self.inner().coupling()
    }

    fn __repr__(&self) -> String {
        format!("Constants(e={}, k0={}, c={}, hbar={})", self.e, self.k0, self.c, self.hbar)
    }
}

/// Transverse plane-wave potential `A(xi) = (A1, A2)`.
#[pyclass(name = "Potential", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyPotential {
    spec: PotentialSpec,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn zero() -> Self {
        Self { spec: PotentialSpec::Zero }
    }

    #[staticmethod]
    fn constant(a1: f64, a2: f64) -> PyResult<Self> {
        Self::checked(PotentialSpec::Constant { a1, a2 })
    }

    #[staticmethod]
    #[pyo3(signature = (a, kappa, phase = 0.0))]
    fn linear(a: f64, kappa: f64, phase: f64) -> PyResult<Self> {
        Self::checked(PotentialSpec::LinearPolarized { a, kappa, phase })
    }

    #[staticmethod]
    #[pyo3(signature = (a, kappa, phase = 0.0))]
    fn circular(a: f64, kappa: f64, phase: f64) -> PyResult<Self> {
        Self::checked(PotentialSpec::CircularPolarized { a, kappa, phase })
    }

    #[staticmethod]
    fn pulse(a: f64, kappa: f64, width: f64) -> PyResult<Self> {
        Self::checked(PotentialSpec::PulseEnvelope { a, kappa, width })
    }

    /// Cubic spline through `(xi, A1, A2)` samples, zero outside them.
    #[staticmethod]
    fn tabulated(samples: Vec<(f64, f64, f64)>) -> PyResult<Self> {
        Ok(Self { spec: PotentialSpec::Tabulated(TabulatedPotential::new(&samples).map_err(to_py)?) })
    }

    /// Reads an `xi,A1[,A2]` CSV table.
    #[staticmethod]
    fn from_csv(path: std::path::PathBuf) -> PyResult<Self> {
        let table = TabulatedPotential::from_csv_path(path).map_err(to_py)?;
        Ok(Self { spec: PotentialSpec::Tabulated(table) })
    }

    fn __call__(&self, xi: f64) -> PyResult<(f64, f64)> {
        core_potentials::eval_potential(&self.spec, xi).map_err(to_py)
    }

    /// Field averages over `[xi_lo, xi_hi]` as a dict.
    fn average<'py>(
        &self,
        py: Python<'py>,
        xi_lo: f64,
        xi_hi: f64,
        constants: &PyConstants,
    ) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let avg = core_potentials::average_over(&self.spec, xi_lo, xi_hi, &constants.inner()).map_err(to_py)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("xi_lo", avg.xi_lo)?;
        d.set_item("xi_hi", avg.xi_hi)?;
        d.set_item("mean_a1", avg.mean_a1)?;
        d.set_item("mean_a2", avg.mean_a2)?;
        d.set_item("mean_asq", avg.mean_asq)?;
        d.set_item("variance", avg.variance)?;
        d.set_item("k0_eff", avg.k0_eff)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        match &self.spec {
            PotentialSpec::Tabulated(t) => format!("Potential(tabulated, {} samples)", t.samples().len()),
            other => format!("Potential({other:?})"),
        }
    }
}

impl PyPotential {
    fn checked(spec: PotentialSpec) -> PyResult<Self> {
        spec.validate().map_err(to_py)?;
        Ok(Self { spec })
    }
}

/// A propagator value: `delta_coeff * delta(lambda^2) + smooth`.
#[pyclass(name = "PropagatorValue", frozen, get_all, from_py_object)]
#[derive(Clone)]
pub struct PyPropagatorValue {
    delta_coeff: Complex64,
    smooth: Complex64,
    region: &'static str,
    lambda_sq: f64,
    effective_k0: f64,
    phase: Complex64,
}

impl From<core_propagators::PropagatorValue> for PyPropagatorValue {
    fn from(v: core_propagators::PropagatorValue) -> Self {
        Self {
            delta_coeff: v.delta_coeff,
            smooth: v.smooth,
            region: v.region.region.as_str(),
            lambda_sq: v.region.lambda_sq,
            effective_k0: v.effective_k0,
            phase: v.phase,
        }
    }
}

#[pymethods]
impl PyPropagatorValue {
    fn __repr__(&self) -> String {
        format!(
            "PropagatorValue(region={}, delta_coeff={}, smooth={}, k0_eff={})",
            self.region, self.delta_coeff, self.smooth, self.effective_k0
        )
    }
}

/// Node values of a characteristic-grid solution.
#[pyclass(name = "GoursatGrid", frozen, get_all, from_py_object)]
#[derive(Clone)]
pub struct PyGoursatGrid {
    xi: Vec<f64>,
    eta: Vec<f64>,
    /// `values[i][j]` at `(xi[i], eta[j])`.
    values: Vec<Vec<f64>>,
    unstable: bool,
}

fn free_value(
    kind: fn(&volkov_core::IntervalClassification, f64) -> volkov_core::Result<core_propagators::PropagatorValue>,
    p: Point,
    constants: &PyConstants,
) -> PyResult<PyPropagatorValue> {
    let k = constants.inner();
    let cls = classify_default(&point(p), &k);
    Ok(kind(&cls, k.k0).map_err(to_py)?.into())
}

/// Free Pauli-Jordan function at `p` (source at the origin).
#[pyfunction]
fn delta_s(p: Point, constants: &PyConstants) -> PyResult<PyPropagatorValue> {
    free_value(|c, k0| Ok(core_propagators::delta_s_free(c, k0)), p, constants)
}

/// Free Hadamard function; raises on the light cone.
#[pyfunction]
fn delta_1(p: Point, constants: &PyConstants) -> PyResult<PyPropagatorValue> {
    free_value(core_propagators::delta_1_free, p, constants)
}

/// Free causal function; raises on the light cone.
#[pyfunction]
fn delta_c(p: Point, constants: &PyConstants) -> PyResult<PyPropagatorValue> {
    free_value(core_propagators::delta_c_free, p, constants)
}

#[pyfunction]
fn psi_plus(tau: f64, x_perp: f64, k0: f64) -> PyResult<PyPropagatorValue> {
    Ok(core_propagators::psi_plus(tau, x_perp, k0).map_err(to_py)?.into())
}

#[pyfunction]
fn psi_minus(lam_tilde: f64, k0: f64) -> PyResult<PyPropagatorValue> {
    Ok(core_propagators::psi_minus(lam_tilde, k0).map_err(to_py)?.into())
}

/// Volkov solution at `p` with the source at the origin.
#[pyfunction]
fn volkov_psi(p: Point, potential: &PyPotential, constants: &PyConstants) -> PyResult<PyPropagatorValue> {
    let v = core_propagators::volkov_psi(&point(p), &potential.spec, &constants.inner()).map_err(to_py)?;
    Ok(v.into())
}

/// Two-point propagator; returns `(shape, normalization)` with the physical
/// value `normalization * shape`.
#[pyfunction]
fn schwinger_propagator(
    p_out: Point,
    p_in: Point,
    potential: &PyPotential,
    constants: &PyConstants,
) -> PyResult<(PyPropagatorValue, f64)> {
    let s = core_propagators::schwinger_propagator(&point(p_out), &point(p_in), &potential.spec, &constants.inner())
        .map_err(to_py)?;
    Ok((s.shape.into(), s.normalization))
}

/// `(value, growing)` of `J0(sqrt(xi eta a_sq))` or its `I0` continuation.
#[pyfunction]
fn riemann_function(xi: f64, eta: f64, a_sq: f64) -> (f64, bool) {
    let r = core_propagators::riemann_function(xi, eta, a_sq);
    (r.value, r.growing)
}

#[pyfunction]
fn effective_mass(k0: f64, coupling: f64, variance: f64) -> f64 {
    core_potentials::effective_mass(k0, coupling, variance)
}

#[pyfunction]
fn sonin_closed_form(tau: f64, x_perp: f64, k0: f64, m: u32, n: u32) -> PyResult<f64> {
    core_quadrature::sonin_closed_form(tau, x_perp, k0, m, n).map_err(to_py)
}

/// Numerical Sonin integral as `(value, error_estimate)`.
#[pyfunction]
#[pyo3(signature = (tau, x_perp, k0, m, n, tol = 1e-9))]
fn sonin_numeric(tau: f64, x_perp: f64, k0: f64, m: u32, n: u32, tol: f64) -> PyResult<(f64, f64)> {
    let r = core_quadrature::sonin_numeric(tau, x_perp, k0, m, n, tol).map_err(to_py)?;
    Ok((r.value.re, r.abs_error_estimate))
}

#[pyfunction]
fn macdonald_closed_form(x_perp: f64, k0: f64) -> f64 {
    core_quadrature::macdonald_closed_form(x_perp, k0)
}

#[pyfunction]
#[pyo3(signature = (x_perp, k0, tol = 1e-10))]
fn macdonald_superposition(x_perp: f64, k0: f64, tol: f64) -> PyResult<(f64, f64)> {
    let r = core_quadrature::macdonald_superposition(x_perp, k0, tol).map_err(to_py)?;
    Ok((r.value.re, r.abs_error_estimate))
}

/// Solves the characteristic problem for transverse momentum `(k1, k2)` on
/// `[0, xi_max] x [0, eta_max]` with `n` cells per direction.
#[pyfunction]
#[pyo3(signature = (potential, constants, k1 = 0.0, k2 = 0.0, xi_max = 2.0, eta_max = 2.0, n = 64))]
fn solve_goursat(
    potential: &PyPotential,
    constants: &PyConstants,
    k1: f64,
    k2: f64,
    xi_max: f64,
    eta_max: f64,
    n: usize,
) -> PyResult<PyGoursatGrid> {
    let k = constants.inner();
    let ksq = |xi: f64| big_k_squared(&potential.spec, k1, k2, xi, &k);
    let g = core_goursat::solve_goursat(ksq, xi_max, eta_max, n, n).map_err(to_py)?;
    Ok(PyGoursatGrid {
        xi: (0..=g.n_xi).map(|i| g.xi(i)).collect(),
        eta: (0..=g.n_eta).map(|j| g.eta(j)).collect(),
        values: (0..=g.n_xi).map(|i| (0..=g.n_eta).map(|j| g.value(i, j)).collect()).collect(),
        unstable: g.unstable,
    })
}

/// Grid refinement study as a list of `(n, h, max_error, order)` tuples.
#[pyfunction]
#[pyo3(signature = (potential, constants, k1 = 0.0, k2 = 0.0, xi_max = 2.0, eta_max = 2.0, coarsest = 16, levels = 3))]
#[allow(clippy::too_many_arguments)]
fn convergence_study(
    potential: &PyPotential,
    constants: &PyConstants,
    k1: f64,
    k2: f64,
    xi_max: f64,
    eta_max: f64,
    coarsest: usize,
    levels: u32,
) -> PyResult<Vec<StudyRow>> {
    let k = constants.inner();
    let ksq = |xi: f64| big_k_squared(&potential.spec, k1, k2, xi, &k);
    let rows = core_goursat::convergence_study(ksq, xi_max, eta_max, coarsest, levels).map_err(to_py)?;
    Ok(rows.into_iter().map(|r| (r.n, r.h, r.max_error, r.order)).collect())
}

#[pyfunction]
fn bessel_j0(x: f64) -> f64 {
    sf::bessel_j0(x)
}

#[pyfunction]
fn bessel_j1(x: f64) -> f64 {
    sf::bessel_j1(x)
}

#[pyfunction]
fn bessel_y1(x: f64) -> f64 {
    sf::bessel_y1(x)
}

#[pyfunction]
fn bessel_k1(x: f64) -> f64 {
    sf::bessel_k1(x)
}

#[pyfunction]
fn bessel_i0(x: f64) -> f64 {
    sf::bessel_i0(x)
}

#[pymodule]
fn volkov(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConstants>()?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PyPropagatorValue>()?;
    m.add_class::<PyGoursatGrid>()?;
    m.add("SCHWINGER_NORMALIZATION", core_propagators::SCHWINGER_NORMALIZATION)?;
    m.add_function(wrap_pyfunction!(delta_s, m)?)?;
    m.add_function(wrap_pyfunction!(delta_1, m)?)?;
    m.add_function(wrap_pyfunction!(delta_c, m)?)?;
    m.add_function(wrap_pyfunction!(psi_plus, m)?)?;
    m.add_function(wrap_pyfunction!(psi_minus, m)?)?;
    m.add_function(wrap_pyfunction!(volkov_psi, m)?)?;
    m.add_function(wrap_pyfunction!(schwinger_propagator, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_function, m)?)?;
    m.add_function(wrap_pyfunction!(effective_mass, m)?)?;
    m.add_function(wrap_pyfunction!(sonin_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(sonin_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(macdonald_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(macdonald_superposition, m)?)?;
    m.add_function(wrap_pyfunction!(solve_goursat, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j0, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j1, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_y1, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k1, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i0, m)?)?;
    Ok(())
}
