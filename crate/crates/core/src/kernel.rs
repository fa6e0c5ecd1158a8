//! Density and CDF of `Y₁ + Y₂` with `Yᵢ ~ Gamma(νᵢ, βᵢ)` independent.
//!
//! With `β₂ ≤ β₁` the density is
//! `s^{ν₁+ν₂-1} e^{-s/β₁} / (Γ(ν₁+ν₂) β₁^{ν₁} β₂^{ν₂}) · 1F1(ν₂; ν₁+ν₂; s(1/β₁ - 1/β₂))`
//! and the CDF is a negative-binomial average of regularized incomplete gammas,
//! `Σ_k ω_k P(ν₁+ν₂+k, s/β₂)` with `ω_k = r^{ν₁}(ν₁)_k q^k / k!`, `r = β₂/β₁`, `q = 1 - r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, QuadOptions};
use crate::specfun::{kummer_1f1, ln_gamma_prefactor, log_gamma, log_gamma_unchecked, reg_lower_gamma, LogValue};
use crate::truncation::{clamp_within, EvalResult, TermsUsed};

/// Below this value of `|1/β₁ - 1/β₂|·s` the `1F1` factor is taken as 1.
pub const NEAR_EQUAL_SCALE: f64 = 1e-12;

/// Hard cap on the inner CDF series length.
pub const MAX_CDF_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    nu1: f64,
    nu2: f64,
    beta1: f64,
    beta2: f64,
    swapped: bool,
}

impl KernelParams {
    /// Stores the pair with the larger scale first.
    pub fn new(nu1: f64, nu2: f64, beta1: f64, beta2: f64) -> Result<Self> {
        for (name, v) in [("nu1", nu1), ("nu2", nu2), ("beta1", beta1), ("beta2", beta2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain("KernelParams", format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(if beta2 > beta1 {
            KernelParams { nu1: nu2, nu2: nu1, beta1: beta2, beta2: beta1, swapped: true }
        } else {
            KernelParams { nu1, nu2, beta1, beta2, swapped: false }
        })
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }
    pub fn nu2(&self) -> f64 {
        self.nu2
    }
    pub fn beta1(&self) -> f64 {
        self.beta1
    }
    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    /// Whether construction exchanged the two pairs.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn mean(&self) -> f64 {
        self.nu1 * self.beta1 + self.nu2 * self.beta2
    }

    pub fn variance(&self) -> f64 {
        self.nu1 * self.beta1 * self.beta1 + self.nu2 * self.beta2 * self.beta2
    }
}

/// `1/β₂ - 1/β₁ ≥ 0`, formed without cancelling two large reciprocals.
pub(crate) fn scale_gap(beta1: f64, beta2: f64) -> f64 {
    (beta1 - beta2) / (beta1 * beta2)
}

/// `ln f_Z(s)` for canonical `(ν₁, β₁) ≥ (ν₂, β₂)` in scale, given `ln s` and
/// `ln Γ(ν₁+ν₂)`.
pub(crate) fn ln_kernel_pdf(nu1: f64, nu2: f64, beta1: f64, beta2: f64, s: f64, ln_s: f64, ln_gamma_a0: f64) -> Result<f64> {
    let a0 = nu1 + nu2;
    let z = -s * scale_gap(beta1, beta2);
    let head = (a0 - 1.0) * ln_s - nu1 * beta1.ln() - nu2 * beta2.ln() - ln_gamma_a0;
    if -z < NEAR_EQUAL_SCALE {
        return Ok(head - s / beta2);
    }
    let f = kummer_1f1(nu2, a0, z)?;
    Ok((LogValue::from_ln(head - s / beta1) * f).ln())
}

/// Density of the gamma convolution at `s > 0`.
///
/// Uses the representation whose `1F1` argument is nonpositive; the Kummer
/// transformation inside [`kummer_1f1`] then sums a series of positive terms.
pub fn kernel_pdf(k: &KernelParams, s: f64) -> Result<f64> {
    check_positive("kernel_pdf", s)?;
    let lg = log_gamma_unchecked(k.nu1 + k.nu2);
    Ok(ln_kernel_pdf(k.nu1, k.nu2, k.beta1, k.beta2, s, s.ln(), lg)?.exp())
}

/// Which exponential the closed form is written around.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelForm {
    /// `e^{-s/β_small} · 1F1(ν_big; ν₁+ν₂; s(1/β_small - 1/β_big))`, argument `≥ 0`.
    SmallScaleExponent,
    /// `e^{-s/β_big} · 1F1(ν_small; ν₁+ν₂; s(1/β_big - 1/β_small))`, argument `≤ 0`.
    LargeScaleExponent,
}

/// Density written in one of the two equivalent forms, without the
/// near-equal-scale shortcut.
pub fn kernel_pdf_form(k: &KernelParams, s: f64, form: KernelForm) -> Result<f64> {
    check_positive("kernel_pdf_form", s)?;
    let a0 = k.nu1 + k.nu2;
    let head = (a0 - 1.0) * s.ln() - k.nu1 * k.beta1.ln() - k.nu2 * k.beta2.ln() - log_gamma_unchecked(a0);
    let gap = s * scale_gap(k.beta1, k.beta2);
    let v = match form {
        KernelForm::SmallScaleExponent => LogValue::from_ln(head - s / k.beta2) * kummer_1f1(k.nu1, a0, gap)?,
        KernelForm::LargeScaleExponent => LogValue::from_ln(head - s / k.beta1) * kummer_1f1(k.nu2, a0, -gap)?,
    };
    Ok(v.to_f64())
}

fn check_positive(op: &'static str, s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(op, format!("s must be positive and finite, got {s}")));
    }
    Ok(())
}

/// Negative-binomial weights `ω_k` of the CDF series with certified tails.
#[derive(Debug, Clone)]
pub(crate) struct NbSeries {
    weights: Vec<f64>,
    /// `tails[k] ≥ Σ_{j>k} ω_j`.
    tails: Vec<f64>,
}

impl NbSeries {
    /// Weights up to the first `k` whose tail bound is `<= tol`.
    pub(crate) fn new(nu: f64, ratio: f64, tol: f64) -> Result<Self> {
        debug_assert!(ratio > 0.0 && ratio <= 1.0);
        let q = 1.0 - ratio;
        let mut weights = Vec::new();
        let mut tails = Vec::new();
        if q <= 0.0 {
            weights.push(1.0);
            tails.push(0.0);
            return Ok(NbSeries { weights, tails });
        }
        let ln_q = q.ln();
        let mut ln_w = nu * ratio.ln();
        let mut cum = 0.0f64;
        for k in 0..MAX_CDF_TERMS {
            let kf = k as f64;
            let w = ln_w.exp();
            cum += w;
            // Every later ratio ω_{j+1}/ω_j is at most q·max((ν+k+1)/(k+2), 1).
            let rho = q * ((nu + kf + 1.0) / (kf + 2.0)).max(1.0);
            let geometric = if rho < 1.0 { w * rho / (1.0 - rho) } else { f64::INFINITY };
            let complement = (1.0 - cum).max(0.0) + 4.0 * f64::EPSILON * (kf + 1.0);
            let tail = geometric.min(complement);
            weights.push(w);
            tails.push(tail);
            if tail <= tol {
                return Ok(NbSeries { weights, tails });
            }
            ln_w += ln_q + (nu + kf).ln() - (kf + 1.0).ln();
        }
        Err(Error::budget("kernel_cdf", format!("{MAX_CDF_TERMS} series terms reached before tolerance {tol:e}")))
    }

    pub(crate) fn len(&self) -> usize {
        self.weights.len()
    }
}

/// `P(base + m, x)` for `m = 0..len`, filled downward from the top so each
/// entry keeps its relative accuracy.
#[derive(Debug, Clone)]
pub(crate) struct GammaCdfLadder {
    values: Vec<f64>,
}

impl GammaCdfLadder {
    pub(crate) fn new(base: f64, x: f64, len: usize) -> Result<Self> {
        let len = len.max(1);
        let mut values = vec![0.0; len];
        if x == 0.0 {
            return Ok(GammaCdfLadder { values });
        }
        values[len - 1] = reg_lower_gamma(base + (len - 1) as f64, x)?;
        for i in (0..len - 1).rev() {
            let a = base + i as f64;
            // P(a, x) - P(a+1, x) = x^a e^{-x} / Γ(a+1)
            values[i] = (values[i + 1] + ln_gamma_prefactor(a, x).exp()).min(1.0);
        }
        Ok(GammaCdfLadder { values })
    }

    #[inline]
    pub(crate) fn get(&self, m: usize) -> f64 {
        self.values[m]
    }

    pub(crate) fn len(&self) -> usize {
        self.values.len()
    }
}

/// One conditional CDF `Σ_k ω_k P(base + offset + k, x)`, stopped at the first
/// `k` whose remaining tail times the next `P` is within `tol`.
///
/// Returns `(value, bound, last k used)`.
pub(crate) fn cdf_cell(nb: &NbSeries, ladder: &GammaCdfLadder, offset: usize, tol: f64) -> (f64, f64, usize) {
    debug_assert!(ladder.len() > offset + nb.len());
    let mut sum = 0.0;
    for k in 0..nb.len() {
        sum += nb.weights[k] * ladder.get(offset + k);
        let bound = nb.tails[k] * ladder.get(offset + k + 1);
        if bound <= tol {
            return (sum, bound, k);
        }
    }
    let last = nb.len() - 1;
    (sum, nb.tails[last], last)
}

/// CDF of the gamma convolution at `s ≥ 0` with truncation bound `<= tol`.
pub fn kernel_cdf(k: &KernelParams, s: f64, tol: f64) -> Result<EvalResult> {
    if !(s >= 0.0) || s.is_nan() {
        return Err(Error::domain("kernel_cdf", format!("s must be nonnegative, got {s}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("kernel_cdf", format!("tol must be positive, got {tol}")));
    }
    let terms = |k_max| TermsUsed { n1: (0, 0), n2: (0, 0), k_max: Some(k_max) };
    if s == 0.0 {
        return Ok(EvalResult { value: 0.0, trunc_error_bound: 0.0, terms: terms(0) });
    }
    if s.is_infinite() {
        return Ok(EvalResult { value: 1.0, trunc_error_bound: 0.0, terms: terms(0) });
    }
    let a0 = k.nu1 + k.nu2;
    let x = s / k.beta2;
    if s * scale_gap(k.beta1, k.beta2) < NEAR_EQUAL_SCALE {
        let value = reg_lower_gamma(a0, x)?;
        return Ok(EvalResult { value, trunc_error_bound: 0.0, terms: terms(0) });
    }
    let nb = NbSeries::new(k.nu1, k.beta2 / k.beta1, tol)?;
    let ladder = GammaCdfLadder::new(a0, x, nb.len() + 1)?;
    let (sum, bound, used) = cdf_cell(&nb, &ladder, 0, tol);
    let value = clamp_within("kernel_cdf", sum, 0.0, 1.0, bound)?;
    Ok(EvalResult { value, trunc_error_bound: bound, terms: terms(used as u64) })
}

/// Brute-force convolution `∫₀^s g₁(u) g₂(s-u) du` by adaptive quadrature.
///
/// Written against the marginal gamma densities only. After `u = s·t` each
/// half of `[0, 1]` is mapped with `t = w^{1/ν}` when the nearby shape is
/// below one, which removes the integrable endpoint singularity.
pub fn kernel_pdf_oracle(k: &KernelParams, s: f64) -> Result<f64> {
    check_positive("kernel_pdf_oracle", s)?;
    let (n1, n2, b1, b2) = (k.nu1, k.nu2, k.beta1, k.beta2);
    let lg1 = log_gamma(n1)?;
    let lg2 = log_gamma(n2)?;
    let ln_g = |nu: f64, beta: f64, lg: f64, u: f64| (nu - 1.0) * u.ln() - u / beta - nu * beta.ln() - lg;
    // integrand in t, with both arguments passed explicitly to keep precision
    // near t = 1
    let h = |t: f64, one_minus_t: f64| -> f64 {
        if t <= 0.0 || one_minus_t <= 0.0 {
            return 0.0;
        }
        s * (ln_g(n1, b1, lg1, s * t) + ln_g(n2, b2, lg2, s * one_minus_t)).exp()
    };
    let p1 = if n1 < 1.0 { 1.0 / n1 } else { 1.0 };
    let p2 = if n2 < 1.0 { 1.0 / n2 } else { 1.0 };
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, max_panels: 50_000 };
    let pieces = |top: f64| -> Vec<f64> { (0..=16).map(|i| top * i as f64 / 16.0).collect() };

    // left half: t = w^{p1}, dt = p1 w^{p1-1} dw
    let left = integrate_pieces(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            let t = w.powf(p1);
            h(t, 1.0 - t) * p1 * w.powf(p1 - 1.0)
        },
        &pieces(0.5f64.powf(1.0 / p1)),
        opts,
    )?;
    // right half: 1 - t = w^{p2}
    let right = integrate_pieces(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            let r = w.powf(p2);
            h(1.0 - r, r) * p2 * w.powf(p2 - 1.0)
        },
        &pieces(0.5f64.powf(1.0 / p2)),
        opts,
    )?;
    Ok(left.value + right.value)
}
