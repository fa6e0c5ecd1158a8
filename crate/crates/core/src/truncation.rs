//! Truncation policies for the Poisson mixture sums and the certified result
//! type every series evaluation returns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{normal_quantile, PoissonTable};

/// How an infinite Poisson-indexed sum is cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruncationMethod {
    /// `[0, J]` with `J` the smallest index whose upper tail is `<= eps`.
    TailQuantile,
    /// `[0, J]` starting from `⌈μ + Φ⁻¹(1-ε)√μ⌉`, raised until the tail is `<= eps`.
    NormalApprox,
    /// Symmetric window around the Poisson mode, widened until the mass outside
    /// is `<= eps`.
    WeightWindow,
}

impl TruncationMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tail" | "tail_quantile" => Some(TruncationMethod::TailQuantile),
            "normal" | "normal_approx" => Some(TruncationMethod::NormalApprox),
            "window" | "weight_window" => Some(TruncationMethod::WeightWindow),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TruncationMethod::TailQuantile => "tail",
            TruncationMethod::NormalApprox => "normal",
            TruncationMethod::WeightWindow => "window",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub method: TruncationMethod,
    pub eps: f64,
    /// Fraction of `eps` given to the first factor; the rest goes to the second.
    pub factor1_share: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { method: TruncationMethod::TailQuantile, eps: 1e-10, factor1_share: 0.5 }
    }
}

impl TruncationPolicy {
    pub fn new(method: TruncationMethod, eps: f64) -> Result<Self> {
        let p = TruncationPolicy { method, eps, factor1_share: 0.5 };
        p.validate()?;
        Ok(p)
    }

    pub fn tail(eps: f64) -> Self {
        TruncationPolicy { method: TruncationMethod::TailQuantile, eps, factor1_share: 0.5 }
    }

    pub fn window(eps: f64) -> Self {
        TruncationPolicy { method: TruncationMethod::WeightWindow, eps, factor1_share: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::domain("truncation policy", format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if !(self.factor1_share > 0.0 && self.factor1_share < 1.0) {
            return Err(Error::domain(
                "truncation policy",
                format!("factor1_share must lie in (0,1), got {}", self.factor1_share),
            ));
        }
        Ok(())
    }

    /// Same method and split with a tighter tolerance.
    pub fn tightened(&self, eps: f64) -> Self {
        TruncationPolicy { eps: self.eps.min(eps), ..*self }
    }

    pub(crate) fn split(&self) -> (f64, f64) {
        (self.eps * self.factor1_share, self.eps * (1.0 - self.factor1_share))
    }
}

/// Inclusive index range kept for one Poisson sum, with the exact mass dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonCut {
    pub lo: u64,
    pub hi: u64,
    pub dropped: f64,
}

impl PoissonCut {
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Cut a Poisson table according to `method` with budget `eps`.
pub fn cut_poisson(table: &PoissonTable, method: TruncationMethod, eps: f64) -> Result<PoissonCut> {
    let (lo, hi) = if table.mean() == 0.0 {
        (0, 0)
    } else {
        match method {
            TruncationMethod::TailQuantile => (0, table.quantile(eps)),
            TruncationMethod::NormalApprox => {
                let mu = table.mean();
                let z = -normal_quantile(eps)?;
                let mut j = (mu + z * mu.sqrt()).ceil().max(0.0) as u64;
                while table.upper_tail(j) > eps {
                    j += 1;
                    if j > table.last() + 1 {
                        break;
                    }
                }
                (0, j)
            }
            TruncationMethod::WeightWindow => table.window(eps),
        }
    };
    let dropped = table.dropped(lo, hi);
    if dropped > eps {
        return Err(Error::budget(
            "poisson truncation",
            format!("dropped mass {dropped:e} exceeds eps {eps:e} (mean {})", table.mean()),
        ));
    }
    Ok(PoissonCut { lo, hi, dropped })
}

/// Index ranges actually summed for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TermsUsed {
    pub n1: (u64, u64),
    pub n2: (u64, u64),
    /// Largest inner CDF series index reached, where one exists.
    pub k_max: Option<u64>,
}

/// A truncated-series value with a certified bound on what truncation dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub trunc_error_bound: f64,
    pub terms: TermsUsed,
}

/// Allowance for accumulated rounding when deciding whether a clamp is
/// explained by truncation.
pub(crate) const ROUNDING_SLACK: f64 = 1e-12;

/// Clamp `value` into `[lo, hi]`, refusing corrections larger than the bound.
pub(crate) fn clamp_within(op: &'static str, value: f64, lo: f64, hi: f64, bound: f64) -> Result<f64> {
    let clamped = value.clamp(lo, hi);
    let moved = (clamped - value).abs();
    if moved > bound + ROUNDING_SLACK * (1.0 + value.abs()) {
        return Err(Error::budget(op, format!("clamping {value:e} into [{lo}, {hi}] exceeds certified bound {bound:e}")));
    }
    Ok(clamped)
}
