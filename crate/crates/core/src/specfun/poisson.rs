//! Poisson weights, exact tail masses and truncation points.

use super::gamma::ln_gamma_prefactor;
use super::normal::normal_quantile;
use crate::error::{Error, Result};

/// Above this mean the tail quantile starts from the normal approximation.
pub const NORMAL_FALLBACK_MEAN: f64 = 1e4;

/// Log weights below this underflow and are not stored.
const LN_NEGLIGIBLE: f64 = -750.0;

/// `ln P(X = n)` for `X ~ Poisson(mean)`.
pub fn ln_poisson_pmf(mean: f64, n: u64) -> f64 {
    ln_gamma_prefactor(n as f64, mean)
}

/// Poisson weights `w_0 ..= w_{n_max}`, each formed in log space.
pub fn poisson_weights(mean: f64, n_max: u64) -> Result<Vec<f64>> {
    check_mean("poisson_weights", mean)?;
    Ok((0..=n_max).map(|n| ln_poisson_pmf(mean, n).exp()).collect())
}

fn check_mean(op: &'static str, mean: f64) -> Result<()> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::domain(op, format!("mean must be finite and nonnegative, got {mean}")));
    }
    Ok(())
}

fn check_eps(op: &'static str, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(op, format!("eps must lie in (0,1), got {eps}")));
    }
    Ok(())
}

/// Smallest `J` with `P(X > J) <= eps` for `X ~ Poisson(mean)`.
///
/// For `mean <= 1e4` this is read off the summed tail table. Larger means start
/// from `⌈mean + Φ⁻¹(1-eps)·√mean⌉` and adjust by local tail evaluation.
pub fn poisson_tail_quantile(mean: f64, eps: f64) -> Result<u64> {
    check_mean("poisson_tail_quantile", mean)?;
    check_eps("poisson_tail_quantile", eps)?;
    if mean == 0.0 {
        return Ok(0);
    }
    let table = PoissonTable::new(mean);
    if mean <= NORMAL_FALLBACK_MEAN {
        return Ok(table.quantile(eps));
    }
    let z = -normal_quantile(eps)?;
    let mut j = (mean + z * mean.sqrt()).ceil().max(0.0) as u64;
    if table.upper_tail(j) > eps {
        while table.upper_tail(j) > eps {
            j += 1;
        }
    } else {
        while j > 0 && table.upper_tail(j - 1) <= eps {
            j -= 1;
        }
    }
    Ok(j)
}

/// Poisson pmf stored over the window where it is representable, with
/// left and right tail masses accumulated from the small end so that tails as
/// small as the underflow threshold keep full relative accuracy.
#[derive(Debug, Clone)]
pub struct PoissonTable {
    mean: f64,
    lo: u64,
    weights: Vec<f64>,
    /// `below[i] = P(X < lo + i)`, length `weights.len() + 1`.
    below: Vec<f64>,
    /// `above[i] = P(X > lo + i)`.
    above: Vec<f64>,
}

impl PoissonTable {
    pub fn new(mean: f64) -> Self {
        assert!(mean >= 0.0 && mean.is_finite(), "Poisson mean must be finite and nonnegative");
        if mean == 0.0 {
            return PoissonTable { mean, lo: 0, weights: vec![1.0], below: vec![0.0, 1.0], above: vec![0.0] };
        }
        let mode = mean.floor() as u64;
        let mut lo = mode;
        while lo > 0 && ln_poisson_pmf(mean, lo - 1) > LN_NEGLIGIBLE {
            // Jump in big steps far from the mode, then walk.
            let step = ((mode - lo) / 8).max(1).min(lo);
            if ln_poisson_pmf(mean, lo - step) > LN_NEGLIGIBLE {
                lo -= step;
            } else {
                lo -= 1;
            }
        }
        let mut hi = mode;
        while ln_poisson_pmf(mean, hi + 1) > LN_NEGLIGIBLE {
            let step = ((hi - mode) / 8).max(1);
            if ln_poisson_pmf(mean, hi + step) > LN_NEGLIGIBLE {
                hi += step;
            } else {
                hi += 1;
            }
        }
        let weights: Vec<f64> = (lo..=hi).map(|j| ln_poisson_pmf(mean, j).exp()).collect();
        let n = weights.len();

        // Geometric bounds on what lies outside the window.
        let left_out = if lo == 0 {
            0.0
        } else {
            let r = lo as f64 / mean;
            weights[0] * r / (1.0 - r)
        };
        let right_out = {
            let r = mean / (hi as f64 + 2.0);
            weights[n - 1] * (mean / (hi as f64 + 1.0)) / (1.0 - r)
        };

        let mut below = Vec::with_capacity(n + 1);
        below.push(left_out);
        for w in &weights {
            let last = *below.last().unwrap();
            below.push(last + w);
        }
        let mut above = vec![0.0; n];
        above[n - 1] = right_out;
        for i in (0..n - 1).rev() {
            above[i] = above[i + 1] + weights[i + 1];
        }
        PoissonTable { mean, lo, weights, below, above }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Smallest index held in the table.
    pub fn first(&self) -> u64 {
        self.lo
    }

    /// Largest index held in the table.
    pub fn last(&self) -> u64 {
        self.lo + self.weights.len() as u64 - 1
    }

    pub fn weight(&self, j: u64) -> f64 {
        if j < self.lo || j > self.last() {
            return ln_poisson_pmf(self.mean, j).exp();
        }
        self.weights[(j - self.lo) as usize]
    }

    /// `P(X > j)`.
    pub fn upper_tail(&self, j: u64) -> f64 {
        if j < self.lo {
            return (1.0 - self.lower_tail(j + 1)).max(0.0);
        }
        if j > self.last() {
            return self.above[self.weights.len() - 1];
        }
        self.above[(j - self.lo) as usize]
    }

    /// `P(X < j)`.
    pub fn lower_tail(&self, j: u64) -> f64 {
        if j <= self.lo {
            return if j == 0 { 0.0 } else { self.below[0] };
        }
        let i = ((j - self.lo) as usize).min(self.weights.len());
        self.below[i]
    }

    /// Smallest `J` with `P(X > J) <= eps`.
    pub fn quantile(&self, eps: f64) -> u64 {
        // `above` is nonincreasing: binary search for the first entry <= eps.
        let idx = self.above.partition_point(|&t| t > eps);
        if idx == self.above.len() {
            // Only reachable for eps below the representable tail.
            return self.last() + 1;
        }
        let j = self.lo + idx as u64;
        if j == self.lo && self.lo > 0 {
            let mut j = j;
            while j > 0 && self.upper_tail(j - 1) <= eps {
                j -= 1;
            }
            return j;
        }
        j
    }

    /// Symmetric window `[j⋆ - W, j⋆ + W]` around `j⋆ = ⌊mean⌋` with the
    /// smallest `W` whose uncovered mass is at most `eps`; the right edge never
    /// passes the tail quantile.
    pub fn window(&self, eps: f64) -> (u64, u64) {
        let cap = self.quantile(eps);
        let mode = (self.mean.floor() as u64).min(cap);
        let mut w = 0u64;
        loop {
            let lo = mode.saturating_sub(w);
            let hi = (mode + w).min(cap);
            if self.lower_tail(lo) + self.upper_tail(hi) <= eps {
                return (lo, hi);
            }
            if lo == 0 && hi == cap {
                // Right tail at the cap is within eps by construction.
                return (0, cap);
            }
            w += 1;
        }
    }

    /// Mass outside `[lo, hi]`.
    pub fn dropped(&self, lo: u64, hi: u64) -> f64 {
        self.lower_tail(lo) + self.upper_tail(hi)
    }
}
