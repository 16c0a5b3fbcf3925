//! The genus-one surface `R(z)² = (z - iq)(z - α)(z - α*)(z + iq)` with
//! straight cuts `[iq, α]` and `[α*, -iq]`, its periods and the Abel map.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scattering::{distance_to_segment, segments_intersect};
use crate::specfun::{quad_path, EndpointSingularity, Path, QuadratureSpec};

type C = Complex64;

/// `√((z - a)(z - b))` cut along the segment `[a, b]`, asymptotic to `z - (a+b)/2`.
pub(crate) fn sqseg(z: C, a: C, b: C) -> C {
    let c = 0.5 * (a + b);
    let d = 0.5 * (b - a);
    let w = z - c;
    if w.norm() == 0.0 {
        // Midpoint of the cut, where √(-d²) = ±id; report the side left of a → b.
        return C::i() * d;
    }
    w * (1.0 - d * d / (w * w)).sqrt()
}

/// `R(z)` with straight cuts and `R(z) ~ z²` at infinity.
pub fn big_r(z: C, alpha: C, q: f64) -> C {
    let iq = C::new(0.0, q);
    sqseg(z, iq, alpha) * sqseg(z, alpha.conj(), -iq)
}

/// `R(z) - (z² - Re(α) z)` without cancellation at large `|z|`.
///
/// Writing each factor as `(z - c)(1 + σ)` with
/// `σ = √(1 - δ²) - 1 = -δ²/(1 + √(1 - δ²))`, `δ = d/(z - c)`, the
/// product is `z² - Re(α) z + c₁c₂ + (z - c₁)(z - c₂)(σ₁ + σ₂ + σ₁σ₂)`.
pub(crate) fn r_excess(z: C, alpha: C, q: f64) -> C {
    let iq = C::new(0.0, q);
    let sigma = |a: C, b: C| -> (C, C) {
        let c = 0.5 * (a + b);
        let d = 0.5 * (b - a);
        let w = z - c;
        let delta2 = d * d / (w * w);
        (c, -delta2 / (1.0 + (1.0 - delta2).sqrt()))
    };
    let (c1, s1) = sigma(iq, alpha);
    let (c2, s2) = sigma(alpha.conj(), -iq);
    c1 * c2 + (z - c1) * (z - c2) * (s1 + s2 + s1 * s2)
}

/// `S(z) = R(z)/(z² + q²)`, so that `S ~ 1` at infinity.
pub fn s_fun(z: C, alpha: C, q: f64) -> C {
    big_r(z, alpha, q) / (z * z + q * q)
}

/// Distance from the band stadia to their cuts.
pub(crate) fn stadium_offset(alpha: C, q: f64) -> f64 {
    (0.1 * (C::new(0.0, q) - alpha).norm()).min(0.5 * alpha.im)
}

/// Counterclockwise loop around the cut `[iq, α]` (the b-cycle).
pub(crate) fn band_loop(alpha: C, q: f64) -> Path {
    Path::stadium(C::new(0.0, q), alpha, stadium_offset(alpha, q))
}

/// Counterclockwise loop around the conjugate cut `[-iq, α*]`.
pub(crate) fn conj_band_loop(alpha: C, q: f64) -> Path {
    Path::stadium(C::new(0.0, -q), alpha.conj(), stadium_offset(alpha, q))
}

/// Periods of the holomorphic differential `dz/R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodData {
    /// `c_ν ∮_b dz/R`, real and negative.
    pub h: f64,
    /// `∮_a dz/R = 2∫_α^{α*} dz/R` along the straight gap segment.
    pub a_period: C,
    /// Abel map at infinity, `c_ν ∫_{iq}^{i∞} dz/R`.
    pub a_inf: C,
    /// Normalization `c_ν = 2πi / a_period`.
    pub c_nu: C,
    /// `∫_{α*}^{α} dz/R` along the gap segment.
    pub gap_integral: C,
    /// `Im` part of the raw b-period, kept for diagnostics.
    pub h_imag: f64,
}

fn check_alpha(alpha: C, q: f64) -> Result<()> {
    if !(alpha.im > 0.0) || (alpha - C::new(0.0, q)).norm() < 1e-12 * q {
        return Err(Error::Domain(format!("alpha must lie in the upper half-plane away from iq, got {alpha}")));
    }
    Ok(())
}

/// `∫_{α*}^{α} f(z)/R(z) dz` along the straight gap segment.
pub(crate) fn gap_integral<F: Fn(C) -> C>(f: F, alpha: C, q: f64, quad: &QuadratureSpec) -> Result<C> {
    let spec = quad.with_singularity(EndpointSingularity::InverseSqrtBoth);
    quad_path(|z| f(z) / big_r(z, alpha, q), &Path::segment(alpha.conj(), alpha), &spec)
}

/// Computes `H`, the a-period, `A(∞)`, and `c_ν`.
pub fn period_integrals(alpha: C, q: f64, quad: &QuadratureSpec) -> Result<PeriodData> {
    check_alpha(alpha, q)?;
    let gap = gap_integral(|_| C::new(1.0, 0.0), alpha, q, quad)?;
    let a_period = -2.0 * gap;
    let c_nu = 2.0 * PI * C::i() / a_period;
    let b_loop = quad_path(|z| 1.0 / big_r(z, alpha, q), &band_loop(alpha, q), quad)?;
    let h = c_nu * b_loop;
    let iq = C::new(0.0, q);
    let ray = Path::Ray { from: iq, direction: C::i(), scale: q, decay_rate: 2.0 };
    let tail = quad_path(|z| 1.0 / big_r(z, alpha, q), &ray, &quad.with_singularity(EndpointSingularity::InverseSqrtLeft))?;
    let a_inf = c_nu * tail;
    if h.im.abs() > 1e-6 * h.norm().max(1.0) {
        return Err(Error::Path(format!("b-period is not real (H = {h}); branch or path mismatch")));
    }
    Ok(PeriodData { h: h.re, a_period, a_inf, c_nu, gap_integral: gap, h_imag: h.im })
}

/// Whether the open segment `a → b` meets either cut away from `iq`.
fn segment_hits_cuts(a: C, b: C, alpha: C, q: f64) -> bool {
    let iq = C::new(0.0, q);
    let cuts = [(iq, alpha), (alpha.conj(), -iq)];
    for (c0, c1) in cuts {
        if segments_intersect(a, b, c0, c1) {
            return true;
        }
        // Grazing contact with an interior cut point (other than the shared start iq).
        for (p, far) in [(a, b), (b, a)] {
            if (p - iq).norm() > 1e-12 * q && distance_to_segment(p, c0, c1) < 1e-12 * q && (far - p).norm() > 0.0 {
                let on_branch = (p - alpha).norm() < 1e-12 * q || (p - alpha.conj()).norm() < 1e-12 * q;
                if !on_branch {
                    return true;
                }
            }
        }
    }
    false
}

/// Abel map `A(z) = c_ν ∫_{iq}^z dz/R` along a path avoiding the cuts: the
/// straight segment when admissible, otherwise a two-leg detour through a
/// point far out on the positive real half-plane.
pub fn abel_map(z: C, alpha: C, c_nu: C, q: f64, quad: &QuadratureSpec) -> Result<C> {
    check_alpha(alpha, q)?;
    let iq = C::new(0.0, q);
    if (z - iq).norm() < 1e-14 * q {
        return Ok(C::new(0.0, 0.0));
    }
    for (c0, c1) in [(iq, alpha), (alpha.conj(), -iq)] {
        let d = distance_to_segment(z, c0, c1);
        let is_branch = [iq, alpha, alpha.conj(), -iq].iter().any(|&bp| (z - bp).norm() < 1e-12 * q);
        if d < 1e-12 * q && !is_branch {
            return Err(Error::OnCut(z));
        }
    }
    let ends_on_branch = [alpha, alpha.conj(), -iq].iter().any(|&bp| (z - bp).norm() < 1e-12 * q);
    let f = |s: C| 1.0 / big_r(s, alpha, q);
    if !segment_hits_cuts(iq, z, alpha, q) {
        let sing = if ends_on_branch { EndpointSingularity::InverseSqrtBoth } else { EndpointSingularity::InverseSqrtLeft };
        return Ok(c_nu * quad_path(f, &Path::segment(iq, z), &quad.with_singularity(sing))?);
    }
    let far = 4.0 * (q + z.norm() + alpha.norm());
    for pivot in [C::new(far, 0.0), C::new(far, z.im), C::new(far, 0.5 * (q + z.im))] {
        if segment_hits_cuts(iq, pivot, alpha, q) || segment_hits_cuts(pivot, z, alpha, q) {
            continue;
        }
        let first = quad_path(f, &Path::segment(iq, pivot), &quad.with_singularity(EndpointSingularity::InverseSqrtLeft))?;
        let sing = if ends_on_branch { EndpointSingularity::InverseSqrtRight } else { EndpointSingularity::None };
        let second = quad_path(f, &Path::segment(pivot, z), &quad.with_singularity(sing))?;
        return Ok(c_nu * (first + second));
    }
    Err(Error::Path(format!("no cut-avoiding path from iq to {z}")))
}
