//! Kummer's confluent hypergeometric function 1F1(a; b; z) for real arguments.

use super::LogValue;
use crate::error::{Error, Result};

/// Relative size of the last retained term.
pub const SERIES_TOL: f64 = 1e-16;
/// Hard cap on the number of series terms.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

const RESCALE_AT: f64 = 1e250;

/// `1F1(a; b; z)` in log space.
///
/// For `z < 0` the Kummer transformation `1F1(a;b;z) = e^z 1F1(b-a;b;-z)` is
/// always applied, so with `b > a` the summed series has nonnegative terms.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<LogValue> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain("kummer_1f1", format!("b must be positive, got {b}")));
    }
    if !a.is_finite() || !z.is_finite() {
        return Err(Error::domain("kummer_1f1", format!("non-finite argument a={a} z={z}")));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(LogValue::ONE);
    }
    if z < 0.0 {
        Ok(series(b - a, b, -z)?.mul_exp(z))
    } else {
        series(a, b, z)
    }
}

/// Plain power series `sum (a)_k / (b)_k z^k / k!` for `z >= 0`, rescaled on the
/// fly so the running sum never overflows.
fn series(a: f64, b: f64, z: f64) -> Result<LogValue> {
    if a == 0.0 || z == 0.0 {
        return Ok(LogValue::ONE);
    }
    let mut log_scale = 0.0;
    let mut sum = 1.0f64;
    let mut term = 1.0f64;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) / (b + kf) * z / (kf + 1.0);
        term *= ratio;
        sum += term;
        if term == 0.0 {
            break;
        }
        if sum.abs() > RESCALE_AT {
            let s = sum.abs();
            log_scale += s.ln();
            sum /= s;
            term /= s;
        }
        let next = (a + kf + 1.0) / (b + kf + 1.0) * z / (kf + 2.0);
        if term.abs() <= SERIES_TOL * sum.abs() && next.abs() < 1.0 {
            let sign = if sum > 0.0 { 1 } else if sum < 0.0 { -1 } else { 0 };
            return Ok(LogValue::new(sum.abs().ln(), sign).mul_exp(log_scale));
        }
    }
    if term == 0.0 {
        let sign = if sum > 0.0 { 1 } else if sum < 0.0 { -1 } else { 0 };
        return Ok(LogValue::new(sum.abs().ln(), sign).mul_exp(log_scale));
    }
    Err(Error::NonConvergence { op: "kummer_1f1", terms: MAX_SERIES_TERMS })
}
