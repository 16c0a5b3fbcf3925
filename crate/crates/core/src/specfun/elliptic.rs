//! Complete elliptic integrals of the first and second kind in the
//! parameter convention `K(m) = ∫_0^{π/2} (1 - m sin²θ)^{-1/2} dθ`.
//!
//! The production scheme is the arithmetic-geometric mean. A truncated
//! hypergeometric series is kept alongside it as an independent check.

use std::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

fn check_parameter(m: f64) -> Result<()> {
    if !m.is_finite() || m < 0.0 {
        return domain(format!("elliptic parameter must be finite and non-negative, got {m}"));
    }
    if m > 1.0 {
        return domain(format!("elliptic parameter must not exceed 1, got {m}"));
    }
    Ok(())
}

/// AGM iteration returning `(K, E)` for `0 ≤ m < 1`.
fn agm_pair(m: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    // E/K = 1 - Σ_{n≥0} 2^{n-1} c_n², with c_0² = m and c_{n+1} = (a_n - b_n)/2.
    let mut sum = 0.5 * m;
    let mut pow = 0.5_f64;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let a_next = 0.5 * (a + b);
        let b_next = (a * b).sqrt();
        pow *= 2.0;
        sum += pow * c * c;
        a = a_next;
        b = b_next;
        // Quadratic convergence: once c is below 1e-12 the next c is ~1e-25.
        if c.abs() <= 1e-12 * a {
            break;
        }
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}

/// Complete elliptic integrals `(K(m), E(m))` for `0 ≤ m < 1`.
pub fn complete_elliptic(m: f64) -> Result<(f64, f64)> {
    check_parameter(m)?;
    if m == 1.0 {
        return domain("K(m) diverges logarithmically at m = 1");
    }
    Ok(agm_pair(m))
}

/// Complete elliptic integral of the first kind, `0 ≤ m < 1`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    complete_elliptic(m).map(|(k, _)| k)
}

/// Complete elliptic integral of the second kind, `0 ≤ m ≤ 1`.
pub fn elliptic_e(m: f64) -> Result<f64> {
    check_parameter(m)?;
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok(agm_pair(m).1)
}

/// Hypergeometric series for `(K(m), E(m))`, summed until the terms fall
/// below `tol` relative to the partial sums. Converges for `0 ≤ m < 1`,
/// slowly as `m → 1`; intended for verification only.
pub fn complete_elliptic_series(m: f64, tol: f64) -> Result<(f64, f64)> {
    check_parameter(m)?;
    if m == 1.0 {
        return domain("series for K diverges at m = 1");
    }
    let mut coeff = 1.0_f64; // ((1/2)_n / n!)²
    let mut k_sum = 1.0_f64;
    let mut e_sum = 1.0_f64;
    let mut mp = 1.0_f64;
    for n in 1..200_000usize {
        let nf = n as f64;
        let ratio = (nf - 0.5) / nf;
        coeff *= ratio * ratio;
        mp *= m;
        let term = coeff * mp;
        k_sum += term;
        e_sum += term / (1.0 - 2.0 * nf);
        if term < tol * k_sum {
            return Ok((FRAC_PI_2 * k_sum, FRAC_PI_2 * e_sum));
        }
    }
    Err(crate::Error::Convergence {
        context: "elliptic series".into(),
        estimate: num_complex::Complex64::new(FRAC_PI_2 * k_sum, 0.0),
        error_bound: coeff * mp,
    })
}

/// Power-series coefficients `k_n`, `e_n` with `K = (π/2) Σ k_n mⁿ` and
/// `E = (π/2) Σ e_n mⁿ`, up to and including index `n_max`.
pub(crate) fn series_coefficients(n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let mut k = Vec::with_capacity(n_max + 1);
    let mut e = Vec::with_capacity(n_max + 1);
    let mut coeff = 1.0_f64;
    k.push(1.0);
    e.push(1.0);
    for n in 1..=n_max {
        let nf = n as f64;
        let ratio = (nf - 0.5) / nf;
        coeff *= ratio * ratio;
        k.push(coeff);
        e.push(coeff / (1.0 - 2.0 * nf));
    }
    (k, e)
}
