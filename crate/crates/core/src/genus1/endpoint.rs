//! The self-similar endpoint `α(μ)` of the genus-one band and the
//! characteristic speed of the associated Riemann invariant.

use std::f64::consts::SQRT_2;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::surface::s_fun;
use crate::error::{Error, Result};
use crate::scattering::BarrierParams;
use crate::specfun::{complete_elliptic, quad_path, series_coefficients, EndpointSingularity, Path, QuadratureSpec};

type C = Complex64;

/// Genus-one endpoint at one value of the self-similar variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointState {
    /// `μ = -(x - L)/(2t)`.
    pub mu: f64,
    /// Elliptic parameter `1 - |α - iq|²/|α + iq|²`.
    pub m: f64,
    pub alpha: C,
    /// `|F_M|` at the reference point `t = 1`, `x - L = -2μ`.
    pub res_moment: f64,
    /// `|F_G|` at the same reference point.
    pub res_gap: f64,
}

/// Elliptic parameter `m = 1 - |α - iq|²/|α + iq|²`.
pub fn m_param(alpha: C, q: f64) -> f64 {
    let iq = C::new(0.0, q);
    1.0 - (alpha - iq).norm_sqr() / (alpha + iq).norm_sqr()
}

/// Number of series terms kept for the small-`m` form of `A(m)`.
const A_SERIES_TERMS: usize = 90;

/// Coefficients `c_n` with `(2-m)E - 2(1-m)K = (π/2) Σ_{n≥2} c_n mⁿ`,
/// together with the coefficients `e_n` of `E = (π/2) Σ e_n mⁿ`.
fn a_series_coefficients() -> &'static (Vec<f64>, Vec<f64>) {
    static COEFFS: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let (k, e) = series_coefficients(A_SERIES_TERMS);
        let c = (0..=A_SERIES_TERMS)
            .map(|n| {
                let (em1, km1) = if n == 0 { (0.0, 0.0) } else { (e[n - 1], k[n - 1]) };
                2.0 * e[n] - em1 - 2.0 * k[n] + 2.0 * km1
            })
            .collect();
        (c, e)
    })
}

/// `A(m) = ((2-m)E(m) - 2(1-m)K(m))/(m² E(m))` on `[0, 1)`.
///
/// Below `m = 1/2` the numerator's `m²` is divided out of its power series,
/// which avoids the cancellation of the closed form and gives `A(0) = 3/8`.
pub fn a_of_m(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!("A(m) needs 0 <= m < 1, got {m}")));
    }
    if m < 0.5 {
        let (c, e) = a_series_coefficients();
        let mut num = 0.0;
        let mut den = 0.0;
        for n in (0..=A_SERIES_TERMS).rev() {
            den = den * m + e[n];
            if n >= 2 {
                num = num * m + c[n];
            }
        }
        Ok(num / den)
    } else {
        let (kk, ee) = complete_elliptic(m)?;
        Ok(((2.0 - m) * ee - 2.0 * (1.0 - m) * kk) / (m * m * ee))
    }
}

/// `α = q(√(4A - (1 + mA)²) + i m A)` with `A = A(m)`.
pub fn alpha_from_m(m: f64, q: f64) -> Result<C> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Domain(format!("alpha_from_m needs 0 < m < 1, got {m}")));
    }
    let a = a_of_m(m)?;
    let mut rad = 4.0 * a - (1.0 + m * a).powi(2);
    if rad < 0.0 {
        if rad < -1e-12 {
            return Err(Error::Consistency(format!("negative radicand {rad} in alpha_from_m at m = {m}")));
        }
        rad = 0.0;
    }
    Ok(C::new(q * rad.sqrt(), q * m * a))
}

/// Moment relation solved for `μ`: `μ = [¼(3α² + 2αα* + 3α*²) + q²]/(α + α*)`.
pub fn mu_of_alpha(alpha: C, q: f64) -> f64 {
    let a = alpha.re;
    let b = alpha.im;
    // ¼(3α² + 2|α|² + 3α*²) = 2a² - b².
    (2.0 * a * a - b * b + q * q) / (2.0 * a)
}

fn mu_of_m(m: f64, q: f64) -> Result<f64> {
    Ok(mu_of_alpha(alpha_from_m(m, q)?, q))
}

/// Solves the endpoint system for `α` at the given `μ ∈ (0, √2 q)`.
pub fn solve_endpoint(mu: f64, q: f64) -> Result<EndpointState> {
    solve_endpoint_with(mu, q, &QuadratureSpec::default())
}

/// [`solve_endpoint`] with an explicit quadrature specification for the residual check.
pub fn solve_endpoint_with(mu: f64, q: f64, quad: &QuadratureSpec) -> Result<EndpointState> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Domain(format!("q must be positive, got {q}")));
    }
    if !(mu > 0.0 && mu < SQRT_2 * q) {
        return Err(Error::Domain(format!("mu must lie in (0, sqrt(2) q), got {mu}")));
    }
    let f = |m: f64| mu_of_m(m, q).map(|v| v - mu);
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-6);
    let (mut f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo * f_hi > 0.0 {
        // μ outside the reachable range of the truncated interval: widen once toward the ends.
        let (wlo, whi) = (1e-12, 1.0 - 1e-13);
        let (g_lo, g_hi) = (f(wlo)?, f(whi)?);
        if g_lo * g_hi > 0.0 {
            return Err(Error::Search(format!(
                "no sign change of mu(m) - mu on (0,1): f(1e-12) = {g_lo:e}, f(1-1e-13) = {g_hi:e}"
            )));
        }
        lo = wlo;
        hi = whi;
        f_lo = g_lo;
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm * f_lo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = fm;
        }
    }
    // Safeguarded Newton with a centered-difference slope.
    let mut m = 0.5 * (lo + hi);
    for _ in 0..60 {
        let fm = f(m)?;
        if fm == 0.0 {
            break;
        }
        if fm * f_lo < 0.0 {
            hi = m;
        } else {
            lo = m;
            f_lo = fm;
        }
        let h = 1e-7 * m.min(1.0 - m);
        let slope = (f(m + h)? - f(m - h)?) / (2.0 * h);
        let mut next = m - fm / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - m).abs();
        m = next;
        if step < 1e-14 || hi - lo < 1e-15 {
            break;
        }
    }
    let alpha = alpha_from_m(m, q)?;
    let (fm, fg) = residuals_self_similar(alpha, mu, 1.0, q, quad)?;
    Ok(EndpointState { mu, m, alpha, res_moment: fm.norm(), res_gap: fg.norm() })
}

/// `F_M` and `F_G` as functions of `(α, x - L, t)`.
fn residuals_with_offset(alpha: C, b: f64, t: f64, q: f64, quad: &QuadratureSpec) -> Result<(C, C)> {
    let ac = alpha.conj();
    let f_m = t / 4.0 * (3.0 * alpha * alpha + 2.0 * alpha * ac + 3.0 * ac * ac + 4.0 * q * q) + b / 2.0 * (alpha + ac);
    let spec = quad.with_singularity(EndpointSingularity::InverseSqrtBoth);
    let f_g = quad_path(
        |z| s_fun(z, alpha, q) * (t * (2.0 * z + alpha + ac) + b),
        &Path::segment(ac, alpha),
        &spec,
    )?;
    Ok((f_m, f_g))
}

fn residuals_self_similar(alpha: C, mu: f64, t: f64, q: f64, quad: &QuadratureSpec) -> Result<(C, C)> {
    residuals_with_offset(alpha, -2.0 * t * mu, t, q, quad)
}

/// Moment function `F_M(α, x, t)` and gap function `F_G(α, x, t)`.
pub fn endpoint_residuals(alpha: C, x: f64, t: f64, p: &BarrierParams, quad: &QuadratureSpec) -> Result<(C, C)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("endpoint residuals need t > 0, got {t}")));
    }
    if alpha.im < 0.0 {
        return Err(Error::Domain(format!("alpha must lie in the closed upper half-plane, got {alpha}")));
    }
    residuals_with_offset(alpha, x - p.l(), t, p.q(), quad)
}

/// Characteristic speed `c(α, iq)` of the Riemann invariant `α`.
///
/// For real `α = a` the general quotient is `0/0`; its limit
/// `c = -a - (a² + q²)/a` is used when `Im α ≤ 1e-10 q`.
pub fn char_speed(alpha: C, q: f64) -> Result<C> {
    let iq = C::new(0.0, q);
    if (alpha - iq).norm() < 1e-12 * q {
        return Err(Error::Degenerate("characteristic speed is undefined at alpha = iq (m = 1)".into()));
    }
    if alpha.im <= 1e-10 * q {
        let a = alpha.re;
        if a == 0.0 {
            return Err(Error::Degenerate("characteristic speed is undefined at alpha = 0".into()));
        }
        return Ok(C::new(-a - (a * a + q * q) / a, 0.0));
    }
    let m = m_param(alpha, q);
    let (kk, ee) = complete_elliptic(m).map_err(|_| Error::Degenerate(format!("elliptic parameter m = {m} out of range")))?;
    let ac = alpha.conj();
    let den = (alpha - iq) * kk + (iq - ac) * ee;
    if den.norm() < 1e-14 * q {
        return Err(Error::Degenerate(format!("vanishing denominator in char_speed at alpha = {alpha}")));
    }
    Ok(-(alpha + ac) / 2.0 - (alpha - ac) * (alpha - iq) * kk / den)
}
