//! Leading-order genus-one wave form in terms of the theta function.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::constants::ModulationParams;
use super::endpoint::EndpointState;
use crate::error::{Error, Result};
use crate::scattering::BarrierParams;
use crate::specfun::theta_sum;

type C = Complex64;

/// `(q - Im α) Θ(0)/Θ(2A(∞)) · Θ(2A(∞) + iT₀ - iW)/Θ(iT₀ - iW) · e^{-2iY₀}`
/// with the fast phase `W = Ω/ε` reduced mod 2π. `state` and `mods` must
/// have been computed at the same `(x, t)`; the point itself enters only
/// through them.
pub fn psi_asy_g1(_x: f64, _t: f64, p: &BarrierParams, state: &EndpointState, mods: &ModulationParams) -> Result<C> {
    let fast = (mods.omega / p.eps()).rem_euclid(TAU);
    psi_from_fast_phase(fast, p.q(), state, mods)
}

/// The wave form as a function of the reduced fast phase `W`.
pub fn psi_from_fast_phase(fast: f64, q: f64, state: &EndpointState, mods: &ModulationParams) -> Result<C> {
    let h = mods.h;
    let shift = C::new(0.0, mods.t0 - fast);
    let two_a = 2.0 * mods.a_inf;
    let den = theta_sum(shift, h)?;
    let den_inf = theta_sum(two_a, h)?;
    if den.norm() < 1e-12 {
        return Err(Error::ThetaZero(shift));
    }
    if den_inf.norm() < 1e-12 {
        return Err(Error::ThetaZero(two_a));
    }
    let num = theta_sum(two_a + shift, h)?;
    let theta0 = theta_sum(C::new(0.0, 0.0), h)?;
    let amp = q - state.alpha.im;
    Ok(amp * theta0 / den_inf * num / den * C::new(0.0, -2.0 * mods.y0).exp())
}
