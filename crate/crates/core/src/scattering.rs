//! Exact forward scattering data of the square barrier.
//!
//! For `ψ₀ = q` on `[-L, L]` the Zakharov–Shabat problem is solvable in
//! closed form:
//!
//! `a(z) = [ν cos(2Lν/ε) - i z sin(2Lν/ε)]/ν · e^{2iLz/ε}`,
//! `b(z) = -q sin(2Lν/ε)/ν`, `r = b/a`, with `ν = √(z² + q²)`.
//!
//! Both `a` and `b` are even in `ν`, hence entire and independent of the
//! branch chosen for `ν`. The branch matters for the harmonic expansion of
//! `r` and for the modified phases, so it is passed explicitly as a
//! [`BranchCut`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{quad_path, Path, QuadratureSpec};

type C = Complex64;

/// Physical parameters `(q, L, ε)` of the barrier problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierParams {
    q: f64,
    l: f64,
    eps: f64,
}

impl BarrierParams {
    /// Default relative distance kept from the eigenvalue-birth values `ε_n`.
    pub const DEFAULT_GUARD: f64 = 1e-9;

    /// Validated constructor with the default guard.
    pub fn new(q: f64, l: f64, eps: f64) -> Result<Self> {
        Self::with_guard(q, l, eps, Self::DEFAULT_GUARD)
    }

    /// Validated constructor rejecting `eps` within `guard` (relative) of any `ε_n`.
    pub fn with_guard(q: f64, l: f64, eps: f64, guard: f64) -> Result<Self> {
        for (name, v) in [("q", q), ("L", l), ("eps", eps)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        // ε_n = 4Lq/((2n+1)π) decreases in n; check the two nearest indices.
        let n_star = ((4.0 * l * q / (PI * eps) - 1.0) / 2.0).max(0.0);
        for n in [n_star.floor(), n_star.ceil()] {
            let en = excluded_eps(q, l, n as u64);
            if ((eps - en) / en).abs() < guard {
                return Err(Error::Domain(format!(
                    "eps = {eps} is within the guard distance of the eigenvalue-birth value eps_{n} = {en}"
                )));
            }
        }
        Ok(Self { q, l, eps })
    }

    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Same barrier with a different dispersion parameter.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.q, self.l, eps)
    }
}

/// `ε_n = 4Lq/((2n+1)π)`, the values at which a new eigenvalue is born at the origin.
pub fn excluded_eps(q: f64, l: f64, n: u64) -> f64 {
    4.0 * l * q / ((2 * n + 1) as f64 * PI)
}

/// Branch cut of `ν(z) = √(z² + q²)` joining `-iq` to `iq`.
#[derive(Clone, Debug, PartialEq)]
pub enum BranchCut {
    /// The segment `[-iq, iq]` of the imaginary axis.
    ImaginarySegment,
    /// A simple, conjugation-symmetric polyline from `-iq` to `iq`.
    CurvedPolyline(Vec<C>),
}

impl BranchCut {
    /// Validates and wraps a polyline running from `-iq` to `iq`.
    pub fn curved(points: Vec<C>, q: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Input("cut polyline needs at least two points".into()));
        }
        let tol = 1e-12 * q;
        if (points[0] - C::new(0.0, -q)).norm() > tol || (points[points.len() - 1] - C::new(0.0, q)).norm() > tol {
            return Err(Error::Input("cut polyline must run from -iq to iq".into()));
        }
        let n = points.len();
        for (i, p) in points.iter().enumerate() {
            if (p.conj() - points[n - 1 - i]).norm() > 1e-9 * q {
                return Err(Error::Input("cut polyline is not symmetric under conjugation".into()));
            }
        }
        for i in 0..n - 1 {
            for j in i + 2..n - 1 {
                if segments_intersect(points[i], points[i + 1], points[j], points[j + 1]) {
                    return Err(Error::Input("cut polyline intersects itself".into()));
                }
            }
        }
        let mut pts = points;
        pts[0] = C::new(0.0, -q);
        pts[n - 1] = C::new(0.0, q);
        Ok(BranchCut::CurvedPolyline(pts))
    }
}

/// Boundary side of a cut: `Plus` is the left side with respect to the
/// orientation of the cut, `Minus` the right side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

fn cross(a: C, b: C) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Proper intersection test for the closed segments `[p1,p2]` and `[p3,p4]`.
pub(crate) fn segments_intersect(p1: C, p2: C, p3: C, p4: C) -> bool {
    let d1 = cross(p4 - p3, p1 - p3);
    let d2 = cross(p4 - p3, p2 - p3);
    let d3 = cross(p2 - p1, p3 - p1);
    let d4 = cross(p2 - p1, p4 - p1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Distance from `z` to the segment `[a, b]`.
pub(crate) fn distance_to_segment(z: C, a: C, b: C) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

/// Even-odd test for `z` inside the closed polygon `pts`.
fn inside_polygon(z: C, pts: &[C]) -> bool {
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// `ν` with the cut on `[-iq, iq]`, for `z` off that segment.
fn nu_straight(z: C, q: f64) -> C {
    let w = C::new(q, 0.0) / z;
    z * (1.0 + w * w).sqrt()
}

fn on_imaginary_segment(z: C, q: f64) -> bool {
    z.re.abs() <= 1e-12 * q && z.im.abs() <= q * (1.0 + 1e-12)
}

/// `ν(z) = √(z² + q²)` with the given cut and `ν ~ z` at infinity.
///
/// With the imaginary cut, `Im ν > 0` on `ℂ⁺` off the cut and
/// `ν(x) = sign(x)√(x² + q²)` on the real axis.
pub fn nu_branch(z: C, q: f64, cut: &BranchCut) -> Result<C> {
    match cut {
        BranchCut::ImaginarySegment => {
            if on_imaginary_segment(z, q) {
                return Err(Error::OnCut(z));
            }
            Ok(nu_straight(z, q))
        }
        BranchCut::CurvedPolyline(pts) => {
            for w in pts.windows(2) {
                if distance_to_segment(z, w[0], w[1]) < 1e-12 * q {
                    return Err(Error::OnCut(z));
                }
            }
            if on_imaginary_segment(z, q) {
                // ν is continuous here; take the value from whichever side lies outside.
                let root = (q * q - z.im * z.im).max(0.0).sqrt();
                let left_inside = inside_polygon(C::new(-1e-9 * q, z.im), pts);
                return Ok(C::new(if left_inside { root } else { -root }, 0.0));
            }
            let nu = nu_straight(z, q);
            Ok(if inside_polygon(z, pts) { -nu } else { nu })
        }
    }
}

/// Boundary value of `ν` on the cut from the requested side.
pub fn nu_boundary(z: C, q: f64, cut: &BranchCut, side: Side) -> Result<C> {
    let pts: Vec<C> = match cut {
        BranchCut::ImaginarySegment => vec![C::new(0.0, -q), C::new(0.0, q)],
        BranchCut::CurvedPolyline(p) => p.clone(),
    };
    let mut best = (f64::INFINITY, C::new(0.0, 1.0));
    for w in pts.windows(2) {
        let d = distance_to_segment(z, w[0], w[1]);
        if d < best.0 {
            best = (d, (w[1] - w[0]) / (w[1] - w[0]).norm());
        }
    }
    let normal = C::i() * best.1;
    let probe = match side {
        Side::Plus => z + normal * (1e-7 * q),
        Side::Minus => z - normal * (1e-7 * q),
    };
    let near = nu_branch(probe, q, cut)?;
    let root = (z * z + q * q).sqrt();
    Ok(if (root - near).norm() <= (root + near).norm() { root } else { -root })
}

/// Exact scattering coefficients at one spectral point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringData {
    pub a: C,
    pub b: C,
    pub r: C,
}

/// Branch of `ν` with `Im ν ≥ 0`; legitimate because `a`, `b`, `r` are even in `ν`.
fn nu_upper(z: C, q: f64) -> C {
    let s = (z * z + q * q).sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// `sin(φ)/φ`, accurate near `φ = 0`.
fn sinc(phi: C) -> C {
    if phi.norm() < 1e-4 {
        let p2 = phi * phi;
        1.0 - p2 / 6.0 + p2 * p2 / 120.0
    } else {
        phi.sin() / phi
    }
}

/// Threshold on `Im φ` above which the factored forms are used.
const FACTOR_THRESHOLD: f64 = 20.0;

/// `a(z)` for the barrier, evaluated without overflow.
pub fn a_coefficient(z: C, p: &BarrierParams) -> C {
    let (q, l, eps) = (p.q, p.l, p.eps);
    let nu = nu_upper(z, q);
    let phi = nu * (2.0 * l / eps);
    if phi.im < FACTOR_THRESHOLD {
        let sin_over_nu = sinc(phi) * (2.0 * l / eps);
        (phi.cos() - C::i() * z * sin_over_nu) * (C::i() * z * (2.0 * l / eps)).exp()
    } else {
        // a = e^{2iL(z-ν)/ε} [(ν+z) + (ν-z) e^{2iφ}] / (2ν), with |e^{2iφ}| < e^{-40}.
        let w2 = (C::i() * 2.0 * phi).exp();
        (C::i() * (z - nu) * (2.0 * l / eps)).exp() * ((nu + z) + (nu - z) * w2) / (2.0 * nu)
    }
}

fn b_coefficient(z: C, p: &BarrierParams) -> C {
    let nu = nu_upper(z, p.q);
    let phi = nu * (2.0 * p.l / p.eps);
    -p.q * sinc(phi) * (2.0 * p.l / p.eps)
}

/// `a(z)`, `b(z)` and `r(z) = b/a`.
pub fn scattering_data(z: C, p: &BarrierParams) -> Result<ScatteringData> {
    let a = a_coefficient(z, p);
    let b = b_coefficient(z, p);
    if a.norm() < 1e-300 {
        return Err(Error::Singular(format!("a(z) vanishes at z = {z}: z is an eigenvalue")));
    }
    let nu = nu_upper(z, p.q);
    let phi = nu * (2.0 * p.l / p.eps);
    let r = if phi.im < FACTOR_THRESHOLD {
        b / a
    } else {
        // r = r₀(1 - w²)/(1 - r₀² w²) e^{-2iLz/ε} with w = e^{iφ}.
        let r0 = C::new(0.0, -p.q) / (nu + z);
        let w2 = (C::i() * 2.0 * phi).exp();
        r0 * (1.0 - w2) / (1.0 - r0 * r0 * w2) * (C::i() * z * (-2.0 * p.l / p.eps)).exp()
    };
    Ok(ScatteringData { a, b, r })
}

/// One term of the harmonic expansion
/// `r(z) e^{i(2tz² + 2xz)/ε} = Σ_{k≥0} r_k e^{iθ_k/ε}`, using the imaginary cut.
///
/// `r₀ = -iq/(ν+z)`, `r_k = -r₀^{2k-1}(1 - r₀²)` for `k ≥ 1`, and
/// `θ_k = 2tz² + 2(x-L)z + 4kLν`. On the real axis `1 - r₀² = 1 + |r₀|²`.
pub fn harmonic_term(z: C, k: u32, x: f64, t: f64, p: &BarrierParams) -> Result<(C, C)> {
    let nu = if z.im == 0.0 && z.re == 0.0 {
        C::new(p.q, 0.0)
    } else {
        nu_branch(z, p.q, &BranchCut::ImaginarySegment)?
    };
    let denom = nu + z;
    if denom.norm() < 1e-300 {
        return Err(Error::Singular(format!("ν + z vanishes at z = {z}")));
    }
    let r0 = C::new(0.0, -p.q) / denom;
    let rk = if k == 0 { r0 } else { -r0.powu(2 * k - 1) * (1.0 - r0 * r0) };
    let theta = 2.0 * t * z * z + 2.0 * (x - p.l) * z + 4.0 * k as f64 * p.l * nu;
    Ok((rk, theta))
}

/// Real function whose zeros in `φ ∈ (0, 2Lq/ε)` give the eigenvalues:
/// `a(iy) e^{2Ly/ε} = cos φ + y sin(φ)/ν`, with `ν = εφ/(2L)`, `y = √(q² - ν²)`.
fn eigen_function(phi: f64, p: &BarrierParams) -> f64 {
    let nu = p.eps * phi / (2.0 * p.l);
    let y = (p.q * p.q - nu * nu).max(0.0).sqrt();
    let sinc = if phi.abs() < 1e-8 { 1.0 } else { phi.sin() / phi };
    phi.cos() + y * sinc * (2.0 * p.l / p.eps)
}

/// Imaginary parts `y_j` of all eigenvalues `z_j = i y_j`, sorted ascending.
pub fn eigenvalues(p: &BarrierParams) -> Result<Vec<f64>> {
    let phi_max = 2.0 * p.l * p.q / p.eps;
    // Exactly one root per interval (nπ, (n+1)π) fully inside the range, by
    // monotonicity of cot φ against -y/ν; a quarter-period grid isolates them.
    let step = 0.25 * PI;
    let mut grid = Vec::new();
    let mut phi = step;
    while phi < phi_max {
        grid.push(phi);
        phi += step;
    }
    grid.push(phi_max);
    let mut roots = Vec::new();
    let mut lo = 1e-300_f64.max(0.0);
    let mut f_lo = eigen_function(lo, p);
    for &hi in &grid {
        let f_hi = eigen_function(hi, p);
        if f_lo == 0.0 {
            roots.push(lo);
        } else if f_lo * f_hi < 0.0 {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = eigen_function(m, p);
                if fm == 0.0 || (b - a) < 1e-16 * b {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    let expected = (phi_max / PI + 0.5).floor() as usize;
    if roots.len() != expected {
        return Err(Error::Resolution(format!(
            "found {} eigenvalues, phase count predicts {expected}; refine the bracketing grid",
            roots.len()
        )));
    }
    let scale = 1.0 + phi_max;
    let mut ys = Vec::with_capacity(roots.len());
    for phi in roots {
        if eigen_function(phi, p).abs() > 1e-12 * scale {
            return Err(Error::Resolution(format!("eigenvalue refinement stalled at phase {phi}")));
        }
        let nu = p.eps * phi / (2.0 * p.l);
        ys.push((p.q * p.q - nu * nu).max(0.0).sqrt());
    }
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ys)
}

/// Centered complex difference for `a'(z)`.
fn a_derivative(z: C, p: &BarrierParams, h: f64) -> C {
    (a_coefficient(z + h, p) - a_coefficient(z - h, p)) / (2.0 * h)
}

/// Exact `a'(z)` from the direct form `a = e^{icz}(cos φ - iz sin φ/ν)`,
/// `c = 2L/ε`, `φ = cν`. Valid where the direct form is (`Im φ` moderate,
/// `ν` away from zero).
fn a_derivative_exact(z: C, p: &BarrierParams) -> Option<C> {
    let c = 2.0 * p.l / p.eps;
    let nu = nu_upper(z, p.q);
    let phi = nu * c;
    if phi.im >= FACTOR_THRESHOLD || nu.norm() < 1e-6 * p.q {
        return None;
    }
    let s = phi.sin() / nu;
    let cos = phi.cos();
    let big_a = cos - C::i() * z * s;
    let ds = (c * z * cos - z * s) / (nu * nu);
    let da_inner = -c * z * s - C::i() * s - C::i() * z * ds;
    Some((C::i() * c * z).exp() * (C::i() * c * big_a + da_inner))
}

/// Norming constant `c_k = b(z_k)/a'(z_k)`, the residue of `r` at `z_k`.
/// Uses the exact derivative of `a`, or a centered difference where the
/// direct form is unavailable.
pub fn connection_coefficient(zk: C, p: &BarrierParams) -> Result<C> {
    match a_derivative_exact(zk, p) {
        Some(da) => connection_from_derivative(zk, p, da),
        None => connection_coefficient_with_step(zk, p, 1e-6 * zk.norm().max(1.0)),
    }
}

/// As [`connection_coefficient`] with a centered difference of step `h` for `a'`.
pub fn connection_coefficient_with_step(zk: C, p: &BarrierParams, h: f64) -> Result<C> {
    connection_from_derivative(zk, p, a_derivative(zk, p, h))
}

fn connection_from_derivative(zk: C, p: &BarrierParams, da: C) -> Result<C> {
    // |a| carries the envelope e^{-2L Im z/ε} in the upper half-plane.
    let envelope = (-2.0 * p.l * zk.im / p.eps).exp();
    if da.norm() < 1e-10 * envelope / p.q {
        return Err(Error::Singular(format!("a'(z) = {da} is too small at {zk}: zero is not simple")));
    }
    let a = a_coefficient(zk, p);
    // Newton-step criterion: the zero of a lies within 1e-10·q of z_k.
    if (a / da).norm() > 1e-10 * p.q {
        return Err(Error::Input(format!("z = {zk} is not an eigenvalue (|a/a'| = {:e})", (a / da).norm())));
    }
    Ok(b_coefficient(zk, p) / da)
}

/// `κ(s) = -(1/2π) log(1 + |r₀(s)|²)` for real `s`, where
/// `|r₀(s)|² = q²/(√(s²+q²) + |s|)²`.
pub fn kappa(s: f64, q: f64) -> f64 {
    let root = (s * s + q * q).sqrt() + s.abs();
    -(q * q / (root * root)).ln_1p() / (2.0 * PI)
}

/// `|r₀(s)|²` on the real axis.
pub fn r0_abs_sq(s: f64, q: f64) -> f64 {
    let root = (s * s + q * q).sqrt() + s.abs();
    q * q / (root * root)
}

/// Analytic continuation of `κ` off the real axis near a point with `sign(Re s) = sigma`.
fn kappa_continued(s: C, q: f64, sigma: f64) -> C {
    let root = (s * s + q * q).sqrt() + sigma * s;
    -(C::new(q * q, 0.0) / (root * root)).ln_1p_c() / (2.0 * PI)
}

trait Ln1p {
    fn ln_1p_c(self) -> Self;
}
impl Ln1p for C {
    fn ln_1p_c(self) -> C {
        if self.norm() < 1e-4 {
            self - self * self / 2.0 + self * self * self / 3.0
        } else {
            (1.0 + self).ln()
        }
    }
}

/// `χ(z, a) = i ∫_{-∞}^{a} κ(s)/(s - z) ds`.
///
/// Off the real axis the integral is taken along the real line. For points
/// close to the axis (and on it, where `side` chooses the boundary value;
/// `Plus` is the limit from above) the path is detoured around `Re z`
/// through the half-plane not containing `z`, using the analytic
/// continuation of `κ`.
pub fn chi(z: C, a: f64, q: f64, side: Option<Side>, quad: &QuadratureSpec) -> Result<C> {
    let x0 = z.re;
    let y = z.im;
    let w = 0.5 * (x0.abs().min(a - x0).min(q));
    let deform = x0 < a && x0.abs() > 1e-6 * q && y.abs() < w;
    if y == 0.0 && side.is_none() && x0 < a {
        return Err(Error::OnCut(z));
    }
    if (z - a).norm() < 1e-14 * q.max(a.abs()) {
        return Err(Error::Singular(format!("χ(z, a) diverges at z = a = {a}")));
    }
    let scale = q.max(x0.abs());
    let integrand_real = |s: C| C::i() * kappa(s.re, q) / (s - z);
    let mut total = C::new(0.0, 0.0);
    // Integral over (-∞, hi] along the real axis, broken at 0 and the listed points.
    let real_span = |lo: f64, hi: f64, total: &mut C| -> Result<()> {
        let mut cuts: Vec<f64> = vec![lo];
        for c in [0.0, x0] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
        cuts.push(hi);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        for win in cuts.windows(2) {
            if win[1] - win[0] > 0.0 {
                *total += quad_path(integrand_real, &Path::segment(C::new(win[0], 0.0), C::new(win[1], 0.0)), quad)?;
            }
        }
        Ok(())
    };
    let ray_to_minus_inf = |start: f64| -> Result<C> {
        let path = Path::Ray { from: C::new(start, 0.0), direction: C::new(-1.0, 0.0), scale, decay_rate: 3.0 };
        Ok(-quad_path(integrand_real, &path, quad)?)
    };
    if deform {
        let dir = if y > 0.0 || (y == 0.0 && side == Some(Side::Plus)) { -1.0 } else { 1.0 };
        let left = x0 - w;
        let right = x0 + w;
        let anchor = left.min(0.0).min(-scale);
        total += ray_to_minus_inf(anchor)?;
        real_span(anchor, left, &mut total)?;
        let sigma = x0.signum();
        let box_integrand = |s: C| C::i() * kappa_continued(s, q, sigma) / (s - z);
        let detour = Path::Polyline(vec![
            C::new(left, 0.0),
            C::new(left, dir * w),
            C::new(right, dir * w),
            C::new(right, 0.0),
        ]);
        total += quad_path(box_integrand, &detour, quad)?;
        real_span(right, a, &mut total)?;
    } else {
        if y == 0.0 && x0 < a {
            return Err(Error::Singular(format!("no analytic detour available around real z = {x0}")));
        }
        let anchor = a.min(0.0).min(-scale).min(x0 - scale);
        total += ray_to_minus_inf(anchor)?;
        real_span(anchor, a, &mut total)?;
    }
    Ok(total)
}

/// `κ`, `χ(z, ξ₀)`, `χ(z, ξ₁)` and `δ = exp(χ(z,ξ₀) + χ(z,ξ₁))` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralWeights {
    /// `-(1/2π) log(1 + |r₀(z)|²)` with `r₀` on the imaginary-cut branch.
    pub kappa: f64,
    pub chi_xi0: C,
    pub chi_xi1: C,
    pub delta: C,
}

/// Evaluates the spectral weights at `z` for stationary points `xi1 < xi0`.
pub fn spectral_weights(
    z: C,
    xi0: f64,
    xi1: f64,
    p: &BarrierParams,
    quad: &QuadratureSpec,
    side: Option<Side>,
) -> Result<SpectralWeights> {
    if !(xi1 < xi0) {
        return Err(Error::Domain(format!("need xi1 < xi0, got xi1 = {xi1}, xi0 = {xi0}")));
    }
    let q = p.q;
    let kappa_z = if z.im == 0.0 {
        kappa(z.re, q)
    } else {
        let nu = nu_branch(z, q, &BranchCut::ImaginarySegment)?;
        let r0 = C::new(0.0, -q) / (nu + z);
        -(r0.norm_sqr()).ln_1p() / (2.0 * PI)
    };
    let chi_xi0 = chi(z, xi0, q, side, quad)?;
    let chi_xi1 = chi(z, xi1, q, side, quad)?;
    Ok(SpectralWeights { kappa: kappa_z, chi_xi0, chi_xi1, delta: (chi_xi0 + chi_xi1).exp() })
}

/// One constant-amplitude piece `amplitude` on `[x_lo, x_hi]` of a step potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringStep {
    pub x_lo: f64,
    pub x_hi: f64,
    pub amplitude: C,
}

type Mat2 = [[C; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Scattering matrix of a piecewise-constant potential on `[-L, L]`:
/// `S = e^{izLσ₃/ε} E_N ⋯ E_1 e^{izLσ₃/ε}` with
/// `E_k = exp((-izσ₃ + Q_k)(x_k - x_{k-1})/ε)`, `Q_k = [[0, q_k], [-q_k*, 0]]`.
/// Steps must be listed left to right and tile a symmetric interval.
/// For a single step of amplitude `q` this is `[[a, -b*], [b, a*]]`.
pub fn multistep_scattering(steps: &[ScatteringStep], z: C, eps: f64) -> Result<Mat2> {
    if steps.is_empty() {
        return Err(Error::Input("at least one step is required".into()));
    }
    let l = steps[steps.len() - 1].x_hi;
    let tol = 1e-12 * l.abs().max(1.0);
    if (steps[0].x_lo + l).abs() > tol || l <= 0.0 {
        return Err(Error::Input("steps must tile a symmetric interval [-L, L]".into()));
    }
    for w in steps.windows(2) {
        if (w[0].x_hi - w[1].x_lo).abs() > tol {
            return Err(Error::Input(format!("gap or overlap between steps at x = {}", w[0].x_hi)));
        }
    }
    let edge = {
        let e = (C::i() * z * (l / eps)).exp();
        [[e, C::new(0.0, 0.0)], [C::new(0.0, 0.0), 1.0 / e]]
    };
    let mut s = edge;
    for st in steps.iter().rev() {
        let width = st.x_hi - st.x_lo;
        if width <= 0.0 {
            return Err(Error::Input("steps must have positive width".into()));
        }
        let qk = st.amplitude;
        // M² = -ν² I with ν² = z² + |q_k|², so exp(Ms) = cos(νs) I + sin(νs)/ν M.
        let nu = (z * z + qk.norm_sqr()).sqrt();
        let phase = nu * (width / eps);
        let c = phase.cos();
        let sn = sinc(phase) * (width / eps);
        let e = [[c - C::i() * z * sn, qk * sn], [-qk.conj() * sn, c + C::i() * z * sn]];
        s = mat_mul(&s, &e);
    }
    Ok(mat_mul(&s, &edge))
}
