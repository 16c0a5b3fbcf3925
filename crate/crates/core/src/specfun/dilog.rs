//! Real dilogarithm `Li₂(x)` for `x ≤ 1`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const PI2_6: f64 = PI * PI / 6.0;

/// Maclaurin series, used for `|x| ≤ 1/2`.
fn series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut p = x;
    for k in 1..200 {
        let kf = k as f64;
        let term = p / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        p *= x;
    }
    sum
}

/// Real dilogarithm `Li₂(x) = Σ xᵏ/k²`, continued to `x < -1` by inversion.
pub fn dilog(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("dilog argument must be finite, got {x}"));
    }
    if x > 1.0 {
        return domain(format!("real dilog requires x ≤ 1, got {x}"));
    }
    Ok(dilog_unchecked(x))
}

fn dilog_unchecked(x: f64) -> f64 {
    if x == 1.0 {
        PI2_6
    } else if x == 0.0 {
        0.0
    } else if x < -1.0 {
        // Inversion: Li₂(x) + Li₂(1/x) = -π²/6 - ½ ln²(-x).
        let l = (-x).ln();
        -PI2_6 - 0.5 * l * l - dilog_unchecked(1.0 / x)
    } else if x < -0.5 {
        // Landen: Li₂(x) = -Li₂(x/(x-1)) - ½ ln²(1-x), with x/(x-1) ∈ (1/3, 1/2].
        let l = (1.0 - x).ln();
        -series(x / (x - 1.0)) - 0.5 * l * l
    } else if x <= 0.5 {
        series(x)
    } else {
        // Reflection: Li₂(x) + Li₂(1-x) = π²/6 - ln x ln(1-x).
        PI2_6 - x.ln() * (1.0 - x).ln() - series(1.0 - x)
    }
}
