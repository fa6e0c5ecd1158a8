use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

/// A signed real stored as `sign * exp(log_magnitude)`.
///
/// The logarithm is carried as an unevaluated sum `hi + lo` so products of
/// many factors and the round trip through [`LogValue::from_f64`] stay within
/// a few ulp even when `|ln x|` is in the hundreds.
#[derive(Clone, Copy, PartialEq)]
pub struct LogValue {
    hi: f64,
    lo: f64,
    sign: i8,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { hi: f64::NEG_INFINITY, lo: 0.0, sign: 0 };
    pub const ONE: LogValue = LogValue { hi: 0.0, lo: 0.0, sign: 1 };

    /// Build from a natural log of the magnitude and a sign in {-1, 0, +1}.
    pub fn new(log_magnitude: f64, sign: i8) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue { hi: log_magnitude, lo: 0.0, sign: sign.signum() }
        }
    }

    /// Positive value with the given log magnitude.
    pub fn from_ln(log_magnitude: f64) -> Self {
        Self::new(log_magnitude, 1)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        let ax = x.abs();
        let hi = ax.ln();
        // Residual relative to the rounded exponential, so that to_f64 undoes it.
        let lo = (ax / hi.exp() - 1.0).ln_1p();
        LogValue { hi, lo, sign: if x > 0.0 { 1 } else { -1 } }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let v = self.hi.exp() * self.lo.exp();
        if self.sign > 0 {
            v
        } else {
            -v
        }
    }

    /// Natural log of `|value|` (`-inf` for zero).
    pub fn ln(self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.hi + self.lo
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Multiply by `exp(t)`.
    pub fn mul_exp(self, t: f64) -> Self {
        if self.sign == 0 {
            return self;
        }
        let (hi, err) = two_sum(self.hi, t);
        LogValue { hi, lo: self.lo + err, sign: self.sign }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero LogValue");
        LogValue { hi: -self.hi, lo: -self.lo, sign: self.sign }
    }

    pub fn powf(self, p: f64) -> Self {
        assert!(self.sign > 0, "powf of non-positive LogValue");
        LogValue::from_ln(p * self.ln())
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        if self.sign == 0 || rhs.sign == 0 {
            return LogValue::ZERO;
        }
        let (hi, err) = two_sum(self.hi, rhs.hi);
        LogValue { hi, lo: self.lo + rhs.lo + err, sign: self.sign * rhs.sign }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            o => return Some(o),
        }
        let mag = self.ln().partial_cmp(&other.ln())?;
        Some(if self.sign < 0 { mag.reverse() } else { mag })
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "LogValue(0)"),
            s => write!(f, "LogValue({}exp({}))", if s > 0 { "+" } else { "-" }, self.ln()),
        }
    }
}
