//! Genus-one theta series `Θ(w; H) = Σ_{n∈ℤ} exp(n²H/2 - n w)` for `H < 0`.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Largest truncation index accepted before declaring non-convergence.
const MAX_INDEX: i64 = 1_000_000;

/// Truncation index `N` for the symmetric sum `|n| ≤ N`.
///
/// With `M = max(|Re w|, |H|)` every omitted term satisfies
/// `n²|H|/2 - n·M ≥ ln(1e16)` once `N` solves the quadratic below, so the
/// tail is dominated by a geometric series starting below `1e-16` times
/// the largest term.
fn truncation_index(w: Complex64, h: f64) -> Result<i64> {
    let a = 0.5 * h.abs();
    let m = w.re.abs().max(h.abs());
    let target = 1e16_f64.ln();
    let n = (m + (m * m + 4.0 * a * target).sqrt()) / (2.0 * a);
    let n = n.ceil() + 1.0;
    if !n.is_finite() || n > MAX_INDEX as f64 {
        return Err(Error::Convergence {
            context: format!("theta series truncation for H = {h}"),
            estimate: Complex64::new(f64::NAN, f64::NAN),
            error_bound: f64::INFINITY,
        });
    }
    Ok(n as i64)
}

/// Evaluates `Θ(w; H)`.
pub fn theta_sum(w: Complex64, h: f64) -> Result<Complex64> {
    if !h.is_finite() || h >= 0.0 {
        return domain(format!("theta series needs finite H < 0, got {h}"));
    }
    if !(w.re.is_finite() && w.im.is_finite()) {
        return domain("theta argument must be finite");
    }
    let n = truncation_index(w, h)?;
    Ok(theta_truncated(w, h, n))
}

/// Symmetric partial sum over `|n| ≤ n_max`, accumulated from the outside in.
pub fn theta_truncated(w: Complex64, h: f64, n_max: i64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for k in (1..=n_max).rev() {
        let kf = k as f64;
        let base = 0.5 * kf * kf * h;
        sum += (Complex64::new(base, 0.0) - kf * w).exp();
        sum += (Complex64::new(base, 0.0) + kf * w).exp();
    }
    sum + 1.0
}
