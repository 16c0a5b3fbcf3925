//! Genus-zero asymptotics in the plane-wave region: the one-band
//! g-function, its stationary points, the slow phase correction `ω`, the
//! wave form `q e^{i(q²t/ε + ω)}`, and the finite-difference diagnostic of
//! `ω` against the Laplace equation `ω_tt + q² ω_xx = 0`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_geometry::{first_breaking_time, trace_genus0_band, TraceOptions, TracedContour};
use crate::scattering::{nu_boundary, nu_branch, r0_abs_sq, BarrierParams, BranchCut, Side};
use crate::specfun::{dilog, quad_real, QuadratureSpec};

type C = Complex64;

/// Stationary points of `φ₀` and `φ₁` on the real axis,
/// `ξ₀ = -((x-L)/4t)[1 + √(1 - 8t²q²/(x-L)²)]` and the same with `x + L` for `ξ₁`.
pub fn stationary_points_g0(x: f64, t: f64, p: &BarrierParams) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("stationary points need t > 0, got {t}")));
    }
    let t1 = first_breaking_time(x, p)?;
    if t >= t1 {
        return Err(Error::Region(format!("t = {t} is not below the first breaking time T1({x}) = {t1}")));
    }
    let q = p.q();
    Ok((one_band_point(x - p.l(), t, q), one_band_point(x + p.l(), t, q)))
}

/// `-(b/4t)[1 + √(1 - 8t²q²/b²)]` with the discriminant factored as
/// `(1 - s)(1 + s)`, `s = 2√2 tq/|b|`. A discriminant at rounding level is
/// taken as zero so that the breaking time itself gives the double point.
fn one_band_point(b: f64, t: f64, q: f64) -> f64 {
    let s = 2.0 * SQRT_2 * t * q / b.abs();
    let disc = (1.0 - s) * (1.0 + s);
    let disc = if disc <= 8.0 * f64::EPSILON { 0.0 } else { disc };
    -(b / (4.0 * t)) * (1.0 + disc.sqrt())
}

/// Small-time form of the exterior stationary points, `ξ_k ≈ -(x + (2k-1)L)/(2t)`.
pub fn exterior_stationary_point_small_time(k: u32, x: f64, t: f64, l: f64) -> f64 {
    -(x + (2.0 * k as f64 - 1.0) * l) / (2.0 * t)
}

/// Real stationary point of `θ_k = 2tz² + 2(x-L)z + 4kLν` for `|x| > L`, i.e.
/// the root of `4tξ + 2(x-L) + 4kL|ξ|/√(ξ²+q²)` nearest the small-time form.
pub fn exterior_stationary_point(k: u32, x: f64, t: f64, p: &BarrierParams) -> Result<f64> {
    if !(x.abs() > p.l()) {
        return Err(Error::Region(format!("exterior stationary points need |x| > L, got x = {x}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("stationary points need t > 0, got {t}")));
    }
    let (q, l) = (p.q(), p.l());
    let f = |xi: f64| 4.0 * t * xi + 2.0 * (x - l) + 4.0 * k as f64 * l * xi.abs() / (xi * xi + q * q).sqrt();
    let guess = exterior_stationary_point_small_time(k, x, t, l);
    let mut half = 1e-3 * (q + guess.abs());
    for _ in 0..100 {
        let (a, b) = (guess - half, guess + half);
        if f(a) * f(b) <= 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) < 0.0) == (f(lo) < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(q) {
                    break;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        half *= 1.5;
    }
    Err(Error::Search(format!("no stationary point of theta_{k} found near {guess}")))
}

/// Genus-zero data at a point of the plane-wave region.
#[derive(Clone, Debug, PartialEq)]
pub struct Genus0State {
    pub x: f64,
    pub t: f64,
    pub xi0: f64,
    pub xi1: f64,
    /// Upper half of the band, from `iq` to its real crossing.
    pub band: TracedContour,
    /// Full band `-iq → iq` used as the cut of `ν`.
    pub cut: BranchCut,
    pub omega: f64,
}

/// Cut of `ν` along the band and its mirror image.
pub fn band_cut(band: &TracedContour, q: f64) -> Result<BranchCut> {
    let mut pts: Vec<C> = band.points.iter().map(|z| z.conj()).collect();
    pts.extend(band.points.iter().rev().skip(1).copied());
    // Normalize orientation −iq → iq.
    if pts[0].im > 0.0 {
        pts.reverse();
    }
    BranchCut::curved(pts, q)
}

/// Builds the genus-zero state at `(x, t)` in the plane-wave region.
pub fn genus0_state(x: f64, t: f64, p: &BarrierParams, quad: &QuadratureSpec) -> Result<Genus0State> {
    let (xi0, xi1) = stationary_points_g0(x, t, p)?;
    let band = trace_genus0_band(x - p.l(), t, p.q(), &TraceOptions::for_amplitude(p.q()))?;
    let cut = band_cut(&band, p.q())?;
    let omega = omega_phase(x, t, p, quad, OmegaMethod::Dilog)?;
    Ok(Genus0State { x, t, xi0, xi1, band, cut, omega })
}

/// `g(z) = θ₀/2 - ν(tz + b) + tq²/2`, `φ₀ = 2ν(tz + b) - tq²`, `φ₁ = φ₀ + 4Lν`,
/// with `b = x - L`, `θ₀ = 2tz² + 2bz` and `ν` cut along `cut`.
pub fn gfun_g0(z: C, x: f64, t: f64, p: &BarrierParams, cut: &BranchCut) -> Result<(C, C, C)> {
    let nu = nu_branch(z, p.q(), cut)?;
    Ok(g_from_nu(z, nu, x, t, p))
}

/// Boundary values of [`gfun_g0`] on the cut from the given side.
pub fn gfun_g0_boundary(z: C, x: f64, t: f64, p: &BarrierParams, cut: &BranchCut, side: Side) -> Result<(C, C, C)> {
    let nu = nu_boundary(z, p.q(), cut, side)?;
    Ok(g_from_nu(z, nu, x, t, p))
}

fn g_from_nu(z: C, nu: C, x: f64, t: f64, p: &BarrierParams) -> (C, C, C) {
    let b = x - p.l();
    let q2 = p.q() * p.q();
    let theta0 = 2.0 * t * z * z + 2.0 * b * z;
    let g = theta0 / 2.0 - nu * (t * z + b) + t * q2 / 2.0;
    let phi0 = 2.0 * nu * (t * z + b) - t * q2;
    let phi1 = phi0 + 4.0 * p.l() * nu;
    (g, phi0, phi1)
}

/// Evaluation scheme for `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaMethod {
    /// `-(1/π)(∫_{-∞}^{ξ₁} - ∫_{ξ₀}^{∞}) log(1 + |r₀|²)/ν dλ`.
    Integral,
    /// `-(1/2π)[Li₂(r₀(ξ₀)²) + Li₂(r₀(ξ₁)²)]`.
    Dilog,
}

/// `r₀(ξ)² = -q²/(ν(ξ) + ξ)²` on the real axis, with `ν(ξ) = sign(ξ)√(ξ² + q²)`.
fn r0_squared_real(xi: f64, q: f64) -> Result<f64> {
    let nu = C::new(xi.signum() * (xi * xi + q * q).sqrt(), 0.0);
    let r0 = C::new(0.0, -q) / (nu + xi);
    let r2 = r0 * r0;
    if r2.im.abs() > 1e-12 * r2.norm().max(1.0) {
        return Err(Error::Consistency(format!("r0(xi)^2 = {r2} is not real at xi = {xi}")));
    }
    Ok(r2.re)
}

/// Real-axis integrand `log(1 + |r₀(λ)|²)/ν(λ)`.
fn omega_integrand(lambda: f64, q: f64) -> f64 {
    r0_abs_sq(lambda, q).ln_1p() / (lambda.signum() * (lambda * lambda + q * q).sqrt())
}

/// `F(ζ) = -(1/π) ∫_{-∞}^{λ(ζ)} log(1 + |r₀|²)/ν dλ` with
/// `λ(ζ) = -(ζ/4)[1 + √(1 - 8q²/ζ²)]`, so that `ω = F((x+L)/t) + F((x-L)/t)`.
pub fn omega_profile(zeta: f64, q: f64, quad: &QuadratureSpec) -> Result<f64> {
    let disc = 1.0 - 8.0 * q * q / (zeta * zeta);
    if !(disc >= 0.0) {
        return Err(Error::Domain(format!("F(zeta) needs |zeta| >= 2 sqrt(2) q, got {zeta}")));
    }
    let lambda = -(zeta / 4.0) * (1.0 + disc.sqrt());
    let f = |s: f64| omega_integrand(s, q);
    let whole = if lambda <= 0.0 {
        quad_real(f, f64::NEG_INFINITY, lambda, 3.0, quad)?
    } else {
        // ∫_{-∞}^{λ} = ∫_{-∞}^{-λ} + ∫_{-λ}^{λ}; the second vanishes by oddness.
        quad_real(f, f64::NEG_INFINITY, -lambda, 3.0, quad)?
    };
    Ok(-whole / PI)
}

/// Slow phase correction `ω(x, t)` in the plane-wave region.
pub fn omega_phase(x: f64, t: f64, p: &BarrierParams, quad: &QuadratureSpec, method: OmegaMethod) -> Result<f64> {
    let (xi0, xi1) = stationary_points_g0(x, t, p)?;
    let q = p.q();
    match method {
        OmegaMethod::Integral => {
            let f = |s: f64| omega_integrand(s, q);
            let left = quad_real(f, f64::NEG_INFINITY, xi1, 3.0, quad)?;
            let right = quad_real(f, xi0, f64::INFINITY, 3.0, quad)?;
            Ok(-(left - right) / PI)
        }
        OmegaMethod::Dilog => {
            let a = dilog(r0_squared_real(xi0, q)?)?;
            let b = dilog(r0_squared_real(xi1, q)?)?;
            Ok(-(a + b) / (2.0 * PI))
        }
    }
}

/// Leading-order wave form in the exterior (`0`) and plane-wave regions.
pub fn psi_asy_g0(x: f64, t: f64, p: &BarrierParams) -> Result<C> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be non-negative, got {t}")));
    }
    if x.abs() > p.l() {
        return Ok(C::new(0.0, 0.0));
    }
    if x.abs() == p.l() {
        return Err(Error::Region(format!("x = {x} lies on the edge of the support")));
    }
    let t1 = first_breaking_time(x, p)?;
    if t >= t1 {
        return Err(Error::Region(format!("(x, t) = ({x}, {t}) lies beyond the first breaking time {t1}; use genus1")));
    }
    if t == 0.0 {
        return Ok(C::new(p.q(), 0.0));
    }
    let omega = omega_phase(x, t, p, &QuadratureSpec::default(), OmegaMethod::Dilog)?;
    Ok(p.q() * C::new(0.0, p.q() * p.q() * t / p.eps() + omega).exp())
}

/// Five-point estimate of `f_tt + q² f_xx` at `(x, t)` with step `h`.
pub fn laplace_stencil<F: Fn(f64, f64) -> Result<f64>>(f: F, x: f64, t: f64, q: f64, h: f64) -> Result<f64> {
    let c = f(x, t)?;
    let ftt = (f(x, t + h)? - 2.0 * c + f(x, t - h)?) / (h * h);
    let fxx = (f(x + h, t)? - 2.0 * c + f(x - h, t)?) / (h * h);
    Ok(ftt + q * q * fxx)
}

/// `ω_tt + q² ω_xx` by central differences with step `h`.
pub fn wkb_laplace_residual(x: f64, t: f64, p: &BarrierParams, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("stencil step must be positive, got {h}")));
    }
    for (xs, ts) in [(x, t), (x + h, t), (x - h, t), (x, t + h), (x, t - h)] {
        if !(ts > 0.0 && xs.abs() < p.l() && ts < first_breaking_time(xs, p).unwrap_or(0.0)) {
            return Err(Error::Region(format!("stencil point ({xs}, {ts}) leaves the plane-wave region")));
        }
    }
    let quad = QuadratureSpec::default();
    laplace_stencil(|xs, ts| omega_phase(xs, ts, p, &quad, OmegaMethod::Dilog), x, t, p.q(), h)
}

/// Member `c₁ + c₂ arctan(ζ/q)` of the null family of the self-similar Laplace operator.
pub fn arctan_profile(zeta: f64, c1: f64, c2: f64, q: f64) -> f64 {
    c1 + c2 * (zeta / q).atan()
}

/// `F((x+L)/t) + F((x-L)/t)` for the arctan profile.
pub fn arctan_surrogate(x: f64, t: f64, l: f64, c1: f64, c2: f64, q: f64) -> f64 {
    arctan_profile((x + l) / t, c1, c2, q) + arctan_profile((x - l) / t, c1, c2, q)
}

/// Genus-zero stationary point `ξ₀` evaluated at the first breaking time.
pub fn xi0_at_breaking(x: f64, p: &BarrierParams) -> Result<f64> {
    let t1 = first_breaking_time(x, p)?;
    Ok(one_band_point(x - p.l(), t1, p.q()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> BarrierParams {
        BarrierParams::new(1.0, 1.0, 0.05).unwrap()
    }

    #[test]
    fn stationary_point_values() {
        let p = params();
        let (xi0, xi1) = stationary_points_g0(0.0, 0.25, &p).unwrap();
        assert!((xi0 - 1.707_106_8).abs() < 1e-7 && (xi1 + 1.707_106_8).abs() < 1e-7);
        assert!(stationary_points_g0(0.0, 0.36, &p).is_err());
        for &x in &[0.1, 0.5, 0.9] {
            let v = xi0_at_breaking(x, &p).unwrap();
            assert!((v - 1.0 / SQRT_2).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn exterior_points() {
        let p = params();
        let (x, t) = (2.0, 0.3);
        assert!((exterior_stationary_point(0, x, t, &p).unwrap() + (x - 1.0) / (2.0 * t)).abs() < 1e-12);
        let t_small = 1e-3;
        for k in 1..4 {
            let exact = exterior_stationary_point(k, x, t_small, &p).unwrap();
            let approx = exterior_stationary_point_small_time(k, x, t_small, 1.0);
            assert!((exact - approx).abs() < 1e-2 * approx.abs());
        }
        assert!(exterior_stationary_point(0, 0.5, t, &p).is_err());
    }

    #[test]
    fn omega_methods_agree_and_symmetry() {
        let p = params();
        let quad = QuadratureSpec::default();
        for &(x, t) in &[(0.0, 0.15), (0.3, 0.1), (-0.5, 0.12), (0.8, 0.05)] {
            let a = omega_phase(x, t, &p, &quad, OmegaMethod::Integral).unwrap();
            let b = omega_phase(x, t, &p, &quad, OmegaMethod::Dilog).unwrap();
            assert!((a - b).abs() < 1e-8, "integral {a} vs dilog {b} at ({x}, {t})");
            let c = omega_phase(-x, t, &p, &quad, OmegaMethod::Dilog).unwrap();
            assert!((b - c).abs() < 1e-12);
            let f = omega_profile((x + 1.0) / t, 1.0, &quad).unwrap() + omega_profile((x - 1.0) / t, 1.0, &quad).unwrap();
            assert!((f - b).abs() < 1e-8);
        }
    }

    #[test]
    fn psi_in_regions() {
        let p = params();
        assert_eq!(psi_asy_g0(2.0, 0.5, &p).unwrap(), C::new(0.0, 0.0));
        let v = psi_asy_g0(0.1, 0.15, &p).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-14);
        let small = psi_asy_g0(0.1, 1e-3, &p).unwrap();
        assert!((small.norm() - 1.0).abs() < 1e-14);
        assert!(psi_asy_g0(0.0, 0.5, &p).is_err());
    }

    #[test]
    fn g_function_properties() {
        let p = params();
        let quad = QuadratureSpec::default();
        let (x, t) = (0.0, 0.2);
        let st = genus0_state(x, t, &p, &quad).unwrap();
        for &z in &st.band.points[1..st.band.points.len() - 1] {
            let (_, phi0, _) = gfun_g0_boundary(z, x, t, &p, &st.cut, Side::Minus).unwrap();
            assert!(phi0.im.abs() < 1e-9);
        }
        for k in 1..=20 {
            let z = C::new(st.xi1, 0.1 * k as f64);
            let (_, _, phi1) = gfun_g0(z, x, t, &p, &st.cut).unwrap();
            assert!(phi1.im > 0.0);
        }
        for ang in [0.3, 1.4, 2.6] {
            let z = C::from_polar(1e3, ang);
            let (g, _, _) = gfun_g0(z, x, t, &p, &st.cut).unwrap();
            assert!(g.norm() * z.norm() < 10.0);
        }
        for &z in &[C::new(0.7, 0.4), C::new(-1.3, 0.9), C::new(2.0, 0.2)] {
            let (g, _, _) = gfun_g0(z, x, t, &p, &st.cut).unwrap();
            let (gc, _, _) = gfun_g0(z.conj(), x, t, &p, &st.cut).unwrap();
            assert!((gc.conj() - g).norm() < 1e-12);
        }
    }

    #[test]
    fn laplace_residual_nonzero_and_null_family() {
        let p = params();
        let (x, t) = (0.2, 0.15);
        let r1 = wkb_laplace_residual(x, t, &p, 1e-3).unwrap();
        let r2 = wkb_laplace_residual(x, t, &p, 5e-4).unwrap();
        assert!(r1.abs() > 1e-3);
        assert!(((r1 - r2) / r2).abs() < 0.1);
        let s = laplace_stencil(|xs, ts| Ok(arctan_surrogate(xs, ts, 1.0, 0.3, 0.7, 1.0)), x, t, 1.0, 1e-3).unwrap();
        assert!(s.abs() < 1e-6);
    }
}
