//! Special functions: Euler gamma, log-gamma and the regularized
//! incomplete beta function.
//!
//! The gamma function uses the Lanczos approximation with g = 607/128 and
//! the 15-term Godfrey coefficient set, which is accurate to roughly
//! machine precision for positive real arguments. The incomplete beta
//! uses the classical continued fraction evaluated with the modified
//! Lentz algorithm.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;

const LANCZOS_COEFFS: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

const SQRT_TWO_PI: f64 = 2.5066282746310002;
const LN_SQRT_TWO_PI: f64 = 0.9189385332046727;

/// Maximum iterations for the incomplete-beta continued fraction.
const CF_MAX_ITER: usize = 300;
const CF_EPS: f64 = 1e-15;
const CF_TINY: f64 = 1e-300;

fn lanczos_sum(z: f64) -> f64 {
    // z = x - 1 with x >= 0.5
    let mut s = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        s += c / (z + k as f64);
    }
    s
}

/// Euler gamma function for positive arguments.
///
/// Relative accuracy is close to machine precision (well below 1e-12 over
/// the argument range exercised here). Rejects `alpha <= 0`.
pub fn gamma_fn(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma_fn requires alpha > 0, got {alpha}"
        )));
    }
    Ok(gamma_positive(alpha))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the Lanczos argument in its accurate range.
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_positive(1.0 - x))
    } else {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        SQRT_TWO_PI * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
    }
}

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        let sin_pi_x = (std::f64::consts::PI * x).sin();
        std::f64::consts::PI.ln() - sin_pi_x.ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        LN_SQRT_TWO_PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
    }
}

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and
/// x in [0, 1].
///
/// `one_minus_x` must equal 1 − x; passing it explicitly lets callers that
/// know 1 − x without cancellation (x extremely close to 1) keep full
/// precision through the symmetry branch.
pub fn inc_beta_reg(a: f64, b: f64, x: f64, one_minus_x: f64) -> f64 {
    inc_beta_reg_with_ln_beta(a, b, x, one_minus_x, ln_beta(a, b))
}

/// Same as [`inc_beta_reg`] with ln B(a, b) precomputed by the caller.
pub fn inc_beta_reg_with_ln_beta(a: f64, b: f64, x: f64, one_minus_x: f64, ln_b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if one_minus_x <= 0.0 {
        return 1.0;
    }
    // ln(x) via ln1p when x is near 1, and symmetrically for 1-x.
    let ln_x = if x < 0.9 { x.ln() } else { (-one_minus_x).ln_1p() };
    let ln_xm = if one_minus_x < 0.9 {
        one_minus_x.ln()
    } else {
        (-x).ln_1p()
    };
    let front = (a * ln_x + b * ln_xm - ln_b).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, one_minus_x) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}
