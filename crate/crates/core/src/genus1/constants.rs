//! Slow modulation constants of the genus-one wave: `Ω`, `η`, `H`, the
//! Riemann constant, `A(∞)`, `T₀`, `Y₀` and the normalizations `c_ν`, `c_τ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::surface::{band_loop, big_r, conj_band_loop, gap_integral, period_integrals, r_excess};
use crate::error::{Error, Result};
use crate::phase_geometry::rho1_real_roots;
use crate::scattering::{chi, BarrierParams};
use crate::specfun::{quad_path, quad_path_vec, EndpointSingularity, Path, QuadratureSpec};

type C = Complex64;

/// Constants entering the genus-one theta formula at one `(x, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationParams {
    /// Gap jump constant.
    pub omega: f64,
    /// Band jump constant.
    pub eta: f64,
    /// b-period of the normalized holomorphic differential (negative).
    pub h: f64,
    /// Riemann constant `iπ + H/2`.
    pub k_riemann: C,
    /// Abel map at infinity.
    pub a_inf: C,
    /// b-period of `τ₀`.
    pub t0: f64,
    /// Constant phase at infinity.
    pub y0: f64,
    /// `2πi / ∮_a dz/R`.
    pub c_nu: C,
    /// Constant in the numerator of `τ`, fixed by `∮_a τ = 0`.
    pub c_tau: C,
    /// Real stationary points used by the weight `j`.
    pub xi0: f64,
    pub xi1: f64,
    /// `∮_b τ₁`, which must equal `-Ω`.
    pub tau1_b_period: C,
    /// Imaginary parts discarded when storing `Ω`, `η`, `T₀`, `Y₀`.
    pub imag_parts: [f64; 4],
}

/// Constants at `(x, t)` for the endpoint `alpha`, with `ξ₀ = μ - Re α` and
/// `ξ₁` the leftmost negative root of `ρ₁`.
pub fn modulation_constants(alpha: C, x: f64, t: f64, p: &BarrierParams, quad: &QuadratureSpec) -> Result<ModulationParams> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("modulation constants need t > 0, got {t}")));
    }
    let mu = (p.l() - x) / (2.0 * t);
    let xi0 = mu - alpha.re;
    let roots = rho1_real_roots(alpha, xi0, t, p.l(), p.q())?;
    let xi1 = *roots
        .roots
        .first()
        .ok_or_else(|| Error::Region(format!("rho_1 has no real negative roots at (x, t) = ({x}, {t}): beyond T2")))?;
    modulation_constants_with(alpha, x, t, xi0, xi1, p, quad)
}

fn require_real(name: &str, v: C, scale: f64) -> Result<f64> {
    if v.im.abs() > 1e-8 * scale.max(1.0) {
        return Err(Error::Path(format!("{name} = {v} has an imaginary part beyond 1e-8; branch or path mismatch")));
    }
    Ok(v.re)
}

/// [`modulation_constants`] with explicitly supplied stationary points.
pub fn modulation_constants_with(
    alpha: C,
    x: f64,
    t: f64,
    xi0: f64,
    xi1: f64,
    p: &BarrierParams,
    quad: &QuadratureSpec,
) -> Result<ModulationParams> {
    let q = p.q();
    let b = x - p.l();
    let iq = C::new(0.0, q);
    let re_a = alpha.re;
    let periods = period_integrals(alpha, q, quad)?;
    let gap = periods.gap_integral;
    let r = |z: C| big_r(z, alpha, q);

    // ρ = 2tz + b - S(z)[t(2z + 2Re α) + b], with the polynomial part of
    // the numerator cancelled exactly so that the O(z⁻²) tail is accurate.
    let lin = 2.0 * t * q * q + 2.0 * t * re_a * re_a + b * re_a;
    let rho = |z: C| {
        let u = t * (2.0 * z + 2.0 * re_a) + b;
        (z * lin + b * q * q - r_excess(z, alpha, q) * u) / (z * z + q * q)
    };
    // Ω from the cut loops of ρ.
    let loop_b = quad_path(rho, &band_loop(alpha, q), quad)?;
    let loop_bs = quad_path(rho, &conj_band_loop(alpha, q), quad)?;
    let omega_c = 0.5 * (loop_b - loop_bs);

    // η = -θ₀(iq) - 2∫_{iq}^{i∞} ρ.
    let up = Path::Ray { from: iq, direction: C::i(), scale: q, decay_rate: 2.0 };
    let sqrt_left = quad.with_singularity(EndpointSingularity::InverseSqrtLeft);
    let theta0_iq = 2.0 * t * iq * iq + 2.0 * b * iq;
    let eta_c = -theta0_iq - 2.0 * quad_path(rho, &up, &sqrt_left)?;

    // τ numerator z² - Re(α) z + c_τ with vanishing a-period.
    let c_tau = -gap_integral(|z| z * z - re_a * z, alpha, q, quad)? / gap;
    let w = |z: C| (z * z - re_a * z + c_tau) / r(z);
    let w_b = quad_path(w, &band_loop(alpha, q), quad)?;

    // Weight j on the bands; the gap value is the constant -iπ/2.
    let chis = |z: C| -> Result<C> { Ok(chi(z, xi1, q, None, quad)? + chi(z, xi0, q, None, quad)?) };
    let j_b = |z: C| -> Result<C> { Ok((2.0 * (z + iq) / q).ln() - 2.0 * chis(z)?) };
    let j_bs = |z: C| -> Result<C> { Ok((C::new(q, 0.0) / (2.0 * (z - iq))).ln() - 2.0 * chis(z)?) };
    let failure = std::cell::RefCell::new(None::<Error>);
    let guard = |v: Result<C>| -> C {
        match v {
            Ok(c) => c,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                C::new(0.0, 0.0)
            }
        }
    };
    let band_b = quad_path_vec(
        |z| {
            let j = guard(j_b(z)) / r(z);
            [j, j * (-z - re_a)]
        },
        &band_loop(alpha, q),
        quad,
    )?;
    let band_bs = quad_path_vec(
        |z| {
            let j = guard(j_bs(z)) / r(z);
            [j, j * (-z - re_a)]
        },
        &conj_band_loop(alpha, q),
        quad,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let gap_lin = gap_integral(|z| -z - re_a, alpha, q, quad)?;
    let half_ipi = C::new(0.0, 0.5 * PI);
    let p0_prime = (-0.5 * band_b[0] - 0.5 * band_bs[0] - half_ipi * gap) / (2.0 * PI);
    let p0_zero = (-0.5 * band_b[1] - 0.5 * band_bs[1] - half_ipi * gap_lin) / (2.0 * PI) + PI / 4.0;

    let t0_c = p0_prime * w_b;
    let p1_prime = -C::i() * omega_c / (2.0 * PI) * gap;
    let tau1_b_period = p1_prime * w_b;

    // Y₀ = lim (p₀(z) - ∫_{iq}^z τ₀) with τ₀ = p₀' w dz and w = 1 + O(z⁻²).
    let tail = quad_path(|z| (c_tau - r_excess(z, alpha, q)) / r(z), &up, &sqrt_left)?;
    let y0_c = p0_zero - p0_prime * (tail - iq);

    let scale = t.max(1.0);
    let omega = require_real("Omega", omega_c, scale)?;
    let eta = require_real("eta", eta_c, scale)?;
    let t0 = require_real("T0", t0_c, 1.0)?;
    let y0 = require_real("Y0", y0_c, 1.0)?;
    Ok(ModulationParams {
        omega,
        eta,
        h: periods.h,
        k_riemann: C::new(periods.h / 2.0, PI),
        a_inf: periods.a_inf,
        t0,
        y0,
        c_nu: periods.c_nu,
        c_tau,
        xi0,
        xi1,
        tau1_b_period,
        imag_parts: [omega_c.im, eta_c.im, t0_c.im, y0_c.im],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus1::{psi_asy_g1, psi_from_fast_phase, solve_endpoint};

    fn state_at(x: f64, t: f64) -> (BarrierParams, crate::genus1::EndpointState, ModulationParams) {
        let p = BarrierParams::new(1.0, 1.0, 0.05).unwrap();
        let st = solve_endpoint((p.l() - x) / (2.0 * t), p.q()).unwrap();
        let mods = modulation_constants(st.alpha, x, t, &p, &QuadratureSpec::default()).unwrap();
        (p, st, mods)
    }

    #[test]
    fn constants_reference_point() {
        // Independent dense Gauss–Legendre evaluation at (x, t) = (0.25, 0.4), q = L = 1.
        let (_, _, m) = state_at(0.25, 0.4);
        assert!((m.xi0 - 0.501_509_732_619_748).abs() < 1e-9);
        assert!((m.xi1 + 1.118_625_995_036_670_8).abs() < 1e-9);
        assert!((m.h + 3.732_594_918_067_004).abs() < 1e-9);
        assert!((m.omega + 1.208_927_564_330_067_6).abs() < 1e-9);
        assert!((m.eta - 0.457_386_434_604_371).abs() < 1e-8);
        assert!((m.t0 + 0.205_905_087_967_368_1).abs() < 1e-8);
        assert!((m.y0 + 0.236_571_808_905_511_4).abs() < 1e-8);
    }

    #[test]
    fn reality_and_tau_b_period() {
        for &(x, t) in &[(0.25, 0.4), (0.1, 0.36), (0.6, 0.2)] {
            let (_, _, m) = state_at(x, t);
            for v in m.imag_parts {
                assert!(v.abs() < 1e-8, "imaginary part {v} at ({x}, {t})");
            }
            assert!((m.tau1_b_period + m.omega).norm() < 1e-8);
            assert!(m.h < 0.0);
        }
    }

    #[test]
    fn self_similarity_in_t() {
        let (_, _, a) = state_at(0.25, 0.4);
        // Same μ = 0.9375 at t = 0.2.
        let (_, _, b) = state_at(0.625, 0.2);
        assert!((a.omega / 0.4 - b.omega / 0.2).abs() < 1e-8 * (a.omega / 0.4).abs());
        assert!((a.eta / 0.4 - b.eta / 0.2).abs() < 1e-8 * (a.eta / 0.4).abs());
    }

    #[test]
    fn wave_periodicity_and_bounds() {
        let (p, st, m) = state_at(0.25, 0.4);
        let psi = psi_asy_g1(0.25, 0.4, &p, &st, &m).unwrap();
        let mut shifted = m;
        shifted.omega += 2.0 * PI * p.eps();
        let psi2 = psi_asy_g1(0.25, 0.4, &p, &st, &shifted).unwrap();
        assert!((psi - psi2).norm() < 1e-10);
        let mut t0_shift = m;
        t0_shift.t0 += 2.0 * PI;
        assert!((psi_asy_g1(0.25, 0.4, &p, &st, &t0_shift).unwrap() - psi).norm() < 1e-10);
        let mut max_mod: f64 = 0.0;
        for k in 0..200 {
            let v = psi_from_fast_phase(2.0 * PI * k as f64 / 200.0, p.q(), &st, &m).unwrap();
            assert!(v.norm().is_finite());
            max_mod = max_mod.max(v.norm());
        }
        assert!(max_mod < 4.0 * p.q());
    }
}
