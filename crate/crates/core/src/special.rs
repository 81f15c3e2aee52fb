//! Gaussian tail function and the inverse Mills ratio, stable over the whole line.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

// beyond this the erfc route loses relative accuracy in the ratio phi/Q
const TAIL_SWITCH: f64 = 6.0;
const CF_TERMS: usize = 120;

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn ln_std_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.5 * (2.0 * PI).ln()
}

/// Mills ratio `Q(v) / phi(v)` for large positive `v`, by backward evaluation
/// of its continued fraction `1/(v + 1/(v + 2/(v + 3/(v + ...))))`.
fn mills_ratio_cf(v: f64) -> f64 {
    let mut t = v;
    for k in (1..=CF_TERMS).rev() {
        t = v + k as f64 / t;
    }
    1.0 / t
}

/// Upper tail probability `Q(v) = P(W > v)` of a standard normal.
pub fn q_function(v: f64) -> f64 {
    if v > TAIL_SWITCH {
        std_normal_pdf(v) * mills_ratio_cf(v)
    } else {
        0.5 * libm::erfc(v * FRAC_1_SQRT_2)
    }
}

/// `ln Q(v)`, finite for any finite `v`.
pub fn ln_q_function(v: f64) -> f64 {
    if v > TAIL_SWITCH {
        ln_std_normal_pdf(v) + mills_ratio_cf(v).ln()
    } else if v < -TAIL_SWITCH {
        (-0.5 * libm::erfc(-v * FRAC_1_SQRT_2)).ln_1p()
    } else {
        (0.5 * libm::erfc(v * FRAC_1_SQRT_2)).ln()
    }
}

/// Inverse Mills ratio `phi(v) / Q(v)`, which equals `-Q'(v) / Q(v)`.
pub fn inverse_mills(v: f64) -> f64 {
    if v > TAIL_SWITCH {
        1.0 / mills_ratio_cf(v)
    } else {
        std_normal_pdf(v) / q_function(v)
    }
}
