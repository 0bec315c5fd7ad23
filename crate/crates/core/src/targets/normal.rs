//! Standard normal helpers evaluated in log space.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn log_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `log Phi(z)`, accurate in both tails.
pub fn log_cdf(z: f64) -> f64 {
    if z > 5.0 {
        (-0.5 * libm::erfc(z * FRAC_1_SQRT_2)).ln_1p()
    } else if z > -30.0 {
        cdf(z).ln()
    } else {
        // Asymptotic expansion of the Mills ratio.
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) + 105.0 / (z2 * z2 * z2 * z2);
        -0.5 * z2 - (-z).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

/// `log(exp(p) - exp(q))` for `p > q`.
fn log_diff_exp(p: f64, q: f64) -> f64 {
    p + (-(q - p).exp()).ln_1p()
}

/// `log(Phi(a) - Phi(b))` for `a > b`.
pub fn log_interval_mass(a: f64, b: f64) -> f64 {
    debug_assert!(a > b);
    if a + b > 0.0 {
        // Upper tail: Phi(a) - Phi(b) = Phi(-b) - Phi(-a).
        log_diff_exp(log_cdf(-b), log_cdf(-a))
    } else {
        log_diff_exp(log_cdf(a), log_cdf(b))
    }
}
