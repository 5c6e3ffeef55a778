//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Arguments `s <= 2` use the ascending series (with the logarithmic term
//! written out explicitly); larger arguments use Steed's continued fraction
//! for `K_0(s) e^s`, from which `K_1` follows through the same recurrence
//! quantities. Both paths are accurate to a few ulps over `(0, 1e8]`.
//!
//! Layer formulas must only use the exponentially scaled variants: the
//! unscaled functions underflow to `0.0` once `e^{-s}` does.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

/// One evaluation of `K_0` or `K_1` at a positive argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselEval {
    pub argument: f64,
    pub value: f64,
    /// `value * e^argument`, computed without forming `e^argument`.
    pub scaled_value: f64,
}

fn check_arg(s: f64) -> Result<()> {
    if !s.is_finite() || s <= 0.0 {
        return domain(format!("Bessel K argument must be finite and positive, got {s}"));
    }
    Ok(())
}

/// `K_0(s)`; returns `0.0` once the result underflows.
pub fn bessel_k0(s: f64) -> Result<f64> {
    check_arg(s)?;
    Ok(unscale(k0_k1_scaled_unchecked(s).0, s))
}

/// `K_1(s)`; returns `0.0` once the result underflows.
pub fn bessel_k1(s: f64) -> Result<f64> {
    check_arg(s)?;
    Ok(unscale(k0_k1_scaled_unchecked(s).1, s))
}

/// `K_0(s) e^s`.
pub fn bessel_k0_scaled(s: f64) -> Result<f64> {
    check_arg(s)?;
    Ok(k0_k1_scaled_unchecked(s).0)
}

/// `K_1(s) e^s`.
pub fn bessel_k1_scaled(s: f64) -> Result<f64> {
    check_arg(s)?;
    Ok(k0_k1_scaled_unchecked(s).1)
}

pub fn eval_k0(s: f64) -> Result<BesselEval> {
    check_arg(s)?;
    let (k0s, _) = k0_k1_scaled_unchecked(s);
    Ok(BesselEval { argument: s, value: unscale(k0s, s), scaled_value: k0s })
}

pub fn eval_k1(s: f64) -> Result<BesselEval> {
    check_arg(s)?;
    let (_, k1s) = k0_k1_scaled_unchecked(s);
    Ok(BesselEval { argument: s, value: unscale(k1s, s), scaled_value: k1s })
}

fn unscale(scaled: f64, s: f64) -> f64 {
    // exp(-s) is exactly 0.0 past ~745; the product then underflows gracefully
    scaled * (-s).exp()
}

/// `(K_0(s) e^s, K_1(s) e^s)` without argument validation.
///
/// Callers guarantee `s > 0` and finite. Hot path of every Green's-function
/// evaluation.
#[inline]
pub fn k0_k1_scaled_unchecked(s: f64) -> (f64, f64) {
    if s <= SERIES_LIMIT {
        let (k0, k1) = k0_k1_series(s);
        let e = s.exp();
        (k0 * e, k1 * e)
    } else {
        k0_k1_scaled_cf(s)
    }
}

/// Ascending series, `0 < s <= 2`.
fn k0_k1_series(s: f64) -> (f64, f64) {
    let t = 0.25 * s * s;
    let log_half = (0.5 * s).ln();

    // k = 0 terms
    let mut term0 = 1.0; // t^k / (k!)^2
    let mut term1 = 1.0; // t^k / (k! (k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut i0 = 1.0;
    let mut i1_red = 1.0; // I_1(s) / (s/2)
    let mut k0_tail = 0.0;
    // psi(1) + psi(2) = (H_0 - gamma) + (H_1 - gamma)
    let mut k1_tail = 1.0 - 2.0 * EULER_GAMMA;

    for k in 1..60 {
        let kf = k as f64;
        term0 *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        let psi_sum = 2.0 * harmonic + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA;
        i0 += term0;
        i1_red += term1;
        k0_tail += harmonic * term0;
        k1_tail += psi_sum * term1;
        if term0 < 1e-18 * i0 && term1 * psi_sum.abs() < 1e-18 * k1_tail.abs() {
            break;
        }
    }

    let i1 = 0.5 * s * i1_red;
    let k0 = -(log_half + EULER_GAMMA) * i0 + k0_tail;
    let k1 = 1.0 / s + log_half * i1 - 0.25 * s * k1_tail;
    (k0, k1)
}

/// Steed's continued fraction (order zero), `s > 2`; returns scaled values.
fn k0_k1_scaled_cf(s: f64) -> (f64, f64) {
    const A1: f64 = 0.25;
    let mut b = 2.0 * (1.0 + s);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = A1;
    let mut c = A1;
    let mut a = -A1;
    let mut sum = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        sum += dels;
        if (dels / sum).abs() < f64::EPSILON * 0.5 {
            break;
        }
    }
    let k0s = (std::f64::consts::PI / (2.0 * s)).sqrt() / sum;
    let k1s = k0s * (s + 0.5 - A1 * h) / s;
    (k0s, k1s)
}
