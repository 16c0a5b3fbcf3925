//! Python bindings: barrier parameters, scattering data, breaking times,
//! region classification, the asymptotic wave forms, the genus-one
//! endpoint and constants, and the split-step solver.

use barrier_nls::cli::{classify as classify_point, psi_asymptotic as psi_dispatch, SolverOverrides};
use barrier_nls::genus0::{omega_phase as omega_core, OmegaMethod};
use barrier_nls::genus1::{modulation_constants as constants_core, solve_endpoint as solve_core};
use barrier_nls::nls_direct::{barrier_initial_data, evolve_from};
use barrier_nls::phase_geometry::{first_breaking_time as t1_core, second_breaking_time as t2_core};
use barrier_nls::scattering::{eigenvalues as eig_core, scattering_data as scat_core, BarrierParams as CoreParams};
use barrier_nls::specfun::{complete_elliptic, dilog as dilog_core, theta_sum, QuadratureSpec};
use barrier_nls::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Input(_) | Error::Config(_) | Error::Region(_) | Error::OnCut(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Barrier height `q`, half-width `L` and dispersion parameter `eps`.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct BarrierParams {
    inner: CoreParams,
}

#[pymethods]
impl BarrierParams {
    #[new]
    #[pyo3(signature = (q, l, eps))]
    fn new(q: f64, l: f64, eps: f64) -> PyResult<Self> {
        CoreParams::new(q, l, eps).map(|inner| Self { inner }).map_err(to_py)
    }
    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }
    #[getter(L)]
    fn l(&self) -> f64 {
        self.inner.l()
    }
    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps()
    }
    fn __repr__(&self) -> String {
        format!("BarrierParams(q={}, L={}, eps={})", self.inner.q(), self.inner.l(), self.inner.eps())
    }
}

/// Genus-one endpoint at one value of `mu`.
#[pyclass(frozen, get_all)]
struct EndpointState {
    mu: f64,
    m: f64,
    alpha: Complex64,
    res_moment: f64,
    res_gap: f64,
}

/// `(a, b, r)` at complex `z`.
#[pyfunction]
fn scattering_data(z: Complex64, p: BarrierParams) -> PyResult<(Complex64, Complex64, Complex64)> {
    let s = scat_core(z, &p.inner).map_err(to_py)?;
    Ok((s.a, s.b, s.r))
}

/// Imaginary parts `y` of the eigenvalues `iy`, ascending.
#[pyfunction]
fn eigenvalues(p: BarrierParams) -> PyResult<Vec<f64>> {
    eig_core(&p.inner).map_err(to_py)
}

#[pyfunction]
fn first_breaking_time(x: f64, p: BarrierParams) -> PyResult<f64> {
    t1_core(x, &p.inner).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x, p, tol = 1e-10))]
fn second_breaking_time(x: f64, p: BarrierParams, tol: f64) -> PyResult<f64> {
    t2_core(x, &p.inner, tol).map_err(to_py)
}

/// `(label, T1, T2)` with label in `S0`, `S1`, `S2`, `NA`.
#[pyfunction]
fn classify(x: f64, t: f64, p: BarrierParams) -> (String, Option<f64>, Option<f64>) {
    let r = classify_point(x, t, &p.inner);
    (r.label.as_str().to_string(), r.t1, r.t2)
}

/// Leading-order asymptotic `psi(x, t)`, or `None` outside the covered regions.
#[pyfunction]
fn psi_asymptotic(x: f64, t: f64, p: BarrierParams) -> PyResult<Option<Complex64>> {
    let r = classify_point(x, t, &p.inner);
    psi_dispatch(x, t, &p.inner, &r, &QuadratureSpec::default()).map_err(to_py)
}

/// Slow phase correction in the plane-wave region; `method` is `dilog` or `integral`.
#[pyfunction]
#[pyo3(signature = (x, t, p, method = "dilog"))]
fn omega_phase(x: f64, t: f64, p: BarrierParams, method: &str) -> PyResult<f64> {
    let m = match method {
        "dilog" => OmegaMethod::Dilog,
        "integral" => OmegaMethod::Integral,
        _ => return Err(PyValueError::new_err(format!("unknown method '{method}'"))),
    };
    omega_core(x, t, &p.inner, &QuadratureSpec::default(), m).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (mu, q = 1.0))]
fn solve_endpoint(mu: f64, q: f64) -> PyResult<EndpointState> {
    let s = solve_core(mu, q).map_err(to_py)?;
    Ok(EndpointState { mu: s.mu, m: s.m, alpha: s.alpha, res_moment: s.res_moment, res_gap: s.res_gap })
}

/// `Omega, eta, H, T0, Y0` at `(x, t)` in the genus-one region, as a dict.
#[pyfunction]
fn modulation_constants(py: Python<'_>, x: f64, t: f64, p: BarrierParams) -> PyResult<Py<pyo3::types::PyDict>> {
    let mu = (p.inner.l() - x.abs()) / (2.0 * t);
    let st = solve_core(mu, p.inner.q()).map_err(to_py)?;
    let m = constants_core(st.alpha, x.abs(), t, &p.inner, &QuadratureSpec::default()).map_err(to_py)?;
    let d = pyo3::types::PyDict::new(py);
    for (k, v) in [("Omega", m.omega), ("eta", m.eta), ("H", m.h), ("T0", m.t0), ("Y0", m.y0), ("xi0", m.xi0), ("xi1", m.xi1)] {
        d.set_item(k, v)?;
    }
    d.set_item("alpha", st.alpha)?;
    Ok(d.unbind())
}

/// Runs the split-step solver on the square barrier.
///
/// Returns `(x_nodes, [(t, values), ...])`. Unset grid options use the
/// desk defaults `D = 4`, `N = 2**14`, `dt = dx/4`.
#[pyfunction]
#[pyo3(signature = (p, t_final, snapshot_times, half_width = None, grid_points = None, dt = None))]
fn evolve(
    py: Python<'_>,
    p: BarrierParams,
    t_final: f64,
    snapshot_times: Vec<f64>,
    half_width: Option<f64>,
    grid_points: Option<usize>,
    dt: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<(f64, Vec<Complex64>)>)> {
    let cfg = SolverOverrides { half_width, grid_points, dt }
        .build(p.inner, t_final, snapshot_times)
        .map_err(to_py)?;
    let snaps = py.detach(|| evolve_from(&cfg, barrier_initial_data(&cfg))).map_err(to_py)?;
    Ok((cfg.nodes(), snaps.into_iter().map(|s| (s.t, s.values)).collect()))
}

#[pyfunction]
fn dilog(x: f64) -> PyResult<f64> {
    dilog_core(x).map_err(to_py)
}

/// `(K(m), E(m))`.
#[pyfunction]
fn elliptic_ke(m: f64) -> PyResult<(f64, f64)> {
    complete_elliptic(m).map_err(to_py)
}

/// `sum_n exp(n^2 H/2 - n w)`.
#[pyfunction]
fn theta(w: Complex64, h: f64) -> PyResult<Complex64> {
    theta_sum(w, h).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "barrier_nls")]
fn barrier_nls_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<BarrierParams>()?;
    m.add_class::<EndpointState>()?;
    m.add_function(wrap_pyfunction!(scattering_data, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(first_breaking_time, m)?)?;
    m.add_function(wrap_pyfunction!(second_breaking_time, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(psi_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(omega_phase, m)?)?;
    m.add_function(wrap_pyfunction!(solve_endpoint, m)?)?;
    m.add_function(wrap_pyfunction!(modulation_constants, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(dilog, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_ke, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    Ok(())
}
