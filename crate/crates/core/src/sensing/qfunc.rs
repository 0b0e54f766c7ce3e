//! Gaussian tail function `Q(x) = P(Z > x)` and its inverse.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `Q(x) = ½ erfc(x / √2)`.
pub fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

fn ln_phi(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// Inverse of [`q`] on `(0, 1)`; `NaN` outside.
///
/// Safeguarded Newton on `ln Q(x) - ln p` over `x ≥ 0`, falling back to
/// bisection when a step leaves the bracket. Arguments above ½ use
/// `Q⁻¹(p) = -Q⁻¹(1 - p)`, which is exact in floating point there.
pub fn q_inv(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return f64::NAN;
    }
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        return -q_inv(1.0 - p);
    }
    let target = p.ln();
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    // Tail asymptote as a starting point.
    let mut x = (-2.0 * target).sqrt().min(39.0);
    for _ in 0..200 {
        let qx = q(x);
        let f = qx.ln() - target;
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if f == 0.0 {
            return x;
        }
        // d/dx ln Q = -φ(x)/Q(x)
        let slope = -(ln_phi(x) - qx.ln()).exp();
        let mut next = x - f / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}
