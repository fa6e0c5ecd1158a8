//! One CIR factor `dX = κ(θ - X)dt + σ√X dW` observed over a step `Δt`.
//!
//! Given `X_t = x₀`, `X_{t+Δt} = c·χ²(d, λ)`. Scaled by the weight `a`, the law
//! is a Poisson(λ/2) mixture of Gamma(d/2 + n, β) with `β = 2ac`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{log_gamma_unchecked, PoissonTable};
use crate::truncation::{clamp_within, cut_poisson, EvalResult, PoissonCut, TermsUsed, TruncationPolicy, ROUNDING_SLACK};

/// True iff `2κθ ≥ σ²`.
pub fn feller_holds(kappa: f64, theta: f64, sigma: f64) -> bool {
    2.0 * kappa * theta >= sigma * sigma
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirFactor {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub x0: f64,
    pub weight: f64,
}

impl CirFactor {
    /// Validates positivity and the Feller condition.
    pub fn new(kappa: f64, theta: f64, sigma: f64, x0: f64, weight: f64) -> Result<Self> {
        let f = CirFactor { kappa, theta, sigma, x0, weight };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa", self.kappa), ("theta", self.theta), ("sigma", self.sigma), ("weight", self.weight)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain("CirFactor", format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.x0 >= 0.0) || !self.x0.is_finite() {
            return Err(Error::domain("CirFactor", format!("x0 must be nonnegative and finite, got {}", self.x0)));
        }
        if !check_feller(self) {
            return Err(Error::Feller { lhs: 2.0 * self.kappa * self.theta, rhs: self.sigma * self.sigma });
        }
        Ok(())
    }

    /// `2κθ - σ²`; nonnegative for every constructed factor.
    pub fn feller_gap(&self) -> f64 {
        2.0 * self.kappa * self.theta - self.sigma * self.sigma
    }

    pub fn with_x0(&self, x0: f64) -> Result<Self> {
        CirFactor::new(self.kappa, self.theta, self.sigma, x0, self.weight)
    }
}

pub fn check_feller(f: &CirFactor) -> bool {
    feller_holds(f.kappa, f.theta, f.sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionParams {
    pub c: f64,
    pub d: f64,
    pub lambda: f64,
    pub beta: f64,
    pub dt: f64,
    /// Set when `e^{-κΔt}` underflowed and `λ` was replaced by its limit 0.
    pub stationary_limit: bool,
}

impl TransitionParams {
    /// Shape of the `n = 0` gamma component.
    pub fn base_shape(&self) -> f64 {
        0.5 * self.d
    }

    /// Mean of the Poisson mixing count.
    pub fn poisson_mean(&self) -> f64 {
        0.5 * self.lambda
    }

    /// `E[aX] = β(d/2 + λ/2)`.
    pub fn mean(&self) -> f64 {
        self.beta * 0.5 * (self.d + self.lambda)
    }

    /// `Var[aX] = β²(d/2 + λ)`.
    pub fn variance(&self) -> f64 {
        self.beta * self.beta * (0.5 * self.d + self.lambda)
    }
}

pub fn transition_params(f: &CirFactor, dt: f64) -> Result<TransitionParams> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain("transition_params", format!("dt must be positive and finite, got {dt}")));
    }
    let s2 = f.sigma * f.sigma;
    let decay = (-f.kappa * dt).exp();
    let one_minus = -(-f.kappa * dt).exp_m1();
    let c = s2 * one_minus / (4.0 * f.kappa);
    let d = 4.0 * f.kappa * f.theta / s2;
    let stationary_limit = decay == 0.0;
    let lambda = if stationary_limit { 0.0 } else { 4.0 * f.kappa * decay * f.x0 / (s2 * one_minus) };
    if !(c > 0.0) || !c.is_finite() || !lambda.is_finite() {
        return Err(Error::domain("transition_params", format!("non-finite parameters c={c} lambda={lambda}")));
    }
    Ok(TransitionParams { c, d, lambda, beta: 2.0 * f.weight * c, dt, stationary_limit })
}

/// One exact draw of `a·X_{t+Δt}`: `N ~ Poisson(λ/2)`, then `β·Gamma(d/2 + N, 1)`.
pub fn sample_transition<R: Rng + ?Sized>(p: &TransitionParams, rng: &mut R) -> f64 {
    TransitionSampler::new(p).sample(rng)
}

/// [`sample_transition`] with the Poisson distribution built once.
#[derive(Debug, Clone, Copy)]
pub struct TransitionSampler {
    poisson: Option<Poisson<f64>>,
    shape0: f64,
    beta: f64,
}

impl TransitionSampler {
    pub fn new(p: &TransitionParams) -> Self {
        let mean = p.poisson_mean();
        let poisson = (mean > 0.0).then(|| Poisson::new(mean).expect("positive finite mean"));
        TransitionSampler { poisson, shape0: p.base_shape(), beta: p.beta }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = self.poisson.map_or(0.0, |d| d.sample(rng));
        self.beta * Gamma::new(self.shape0 + n, 1.0).expect("positive finite shape").sample(rng)
    }
}

/// `ln` of the Gamma(shape, scale) density at `s > 0`.
pub(crate) fn ln_gamma_density(shape: f64, scale: f64, s: f64) -> f64 {
    (shape - 1.0) * s.ln() - s / scale - shape * scale.ln() - log_gamma_unchecked(shape)
}

/// Largest value of the Gamma(shape0 + n, scale) density at `s` over `n ≥ 0`.
pub(crate) fn ln_gamma_density_sup_over_n(shape0: f64, scale: f64, s: f64) -> f64 {
    // Ratio of consecutive terms is (s/scale)/(shape0 + n): the maximum sits
    // at the first n where it drops below one.
    let x = s / scale;
    let n_star = if x > shape0 { (x - shape0).floor() + 1.0 } else { 0.0 };
    let mut best = ln_gamma_density(shape0 + n_star, scale, s);
    if n_star >= 1.0 {
        best = best.max(ln_gamma_density(shape0 + n_star - 1.0, scale, s));
    }
    best
}

/// Density of `a·X_{t+Δt}` at `s` as a truncated Poisson–Gamma mixture.
///
/// The whole of `t.eps` goes to the single Poisson index. The bound is the
/// dropped mass times the largest component density at `s`.
pub fn single_factor_pdf(p: &TransitionParams, s: f64, t: &TruncationPolicy) -> Result<EvalResult> {
    MarginalPdf::new(p, t)?.eval(s)
}

/// [`single_factor_pdf`] with the Poisson weights computed once.
#[derive(Debug, Clone)]
pub struct MarginalPdf {
    shape0: f64,
    beta: f64,
    cut: PoissonCut,
    weights: Vec<f64>,
}

impl MarginalPdf {
    pub fn new(p: &TransitionParams, t: &TruncationPolicy) -> Result<Self> {
        t.validate()?;
        let table = PoissonTable::new(p.poisson_mean());
        let cut = cut_poisson(&table, t.method, t.eps)?;
        let weights = (cut.lo..=cut.hi).map(|n| table.weight(n)).collect();
        Ok(MarginalPdf { shape0: p.base_shape(), beta: p.beta, cut, weights })
    }

    pub fn eval(&self, s: f64) -> Result<EvalResult> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain("single_factor_pdf", format!("s must be positive, got {s}")));
        }
        let ln_s_over_beta = (s / self.beta).ln();
        let first = self.shape0 + self.cut.lo as f64;
        let mut ln_g = ln_gamma_density(first, self.beta, s);
        let mut sum = 0.0;
        for (j, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                sum += w * ln_g.exp();
            }
            let shape = first + j as f64;
            ln_g = if j % 64 == 63 {
                ln_gamma_density(shape + 1.0, self.beta, s)
            } else {
                ln_g + ln_s_over_beta - shape.ln()
            };
        }
        let bound = self.cut.dropped * ln_gamma_density_sup_over_n(self.shape0, self.beta, s).exp();
        let value = clamp_within("single_factor_pdf", sum, 0.0, f64::INFINITY, bound)?;
        Ok(EvalResult {
            value,
            trunc_error_bound: bound + ROUNDING_SLACK * value,
            terms: TermsUsed { n1: (self.cut.lo, self.cut.hi), n2: (0, 0), k_max: None },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_pieces, QuadOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn baseline_factor1() -> CirFactor {
        CirFactor::new(1.2, 0.06, 0.35, 0.009, 1.0).unwrap()
    }

    fn baseline_factor2() -> CirFactor {
        CirFactor::new(1.8, 0.009, 0.15, 0.03, 1.0).unwrap()
    }

    #[test]
    fn feller_examples() {
        assert!(check_feller(&baseline_factor1()));
        assert!(check_feller(&baseline_factor2()));
        let boundary = CirFactor::new(1.0, 0.5, 1.0, 0.1, 1.0).unwrap();
        assert!(check_feller(&boundary));
        assert_eq!(boundary.feller_gap(), 0.0);
        assert!(matches!(CirFactor::new(1.2, 0.06, 0.7, 0.009, 1.0), Err(Error::Feller { .. })));
        assert!(CirFactor::new(0.0, 0.06, 0.35, 0.009, 1.0).is_err());
        assert!(CirFactor::new(1.2, 0.06, 0.35, -1.0, 1.0).is_err());
        assert!(CirFactor::new(1.2, 0.06, 0.35, 0.0, 1.0).is_ok());
    }

    #[test]
    fn factor1_unit_step_values() {
        let p = transition_params(&baseline_factor1(), 1.0).unwrap();
        assert!((p.c - 0.017834).abs() < 5e-6, "c = {}", p.c);
        assert!((p.d - 2.35102).abs() < 5e-5, "d = {}", p.d);
        assert!((p.lambda - 0.15200).abs() < 5e-5, "lambda = {}", p.lambda);
        assert_eq!(p.beta, 2.0 * p.c);
        assert!(!p.stationary_limit);
    }

    #[test]
    fn degrees_of_freedom_do_not_depend_on_step() {
        let f = baseline_factor1();
        assert_eq!(transition_params(&f, 0.25).unwrap().d, transition_params(&f, 1.0).unwrap().d);
    }

    #[test]
    fn zero_start_has_no_noncentrality() {
        let f = baseline_factor1().with_x0(0.0).unwrap();
        assert_eq!(transition_params(&f, 0.5).unwrap().lambda, 0.0);
    }

    #[test]
    fn huge_step_flags_stationary_limit() {
        let p = transition_params(&baseline_factor1(), 1e4).unwrap();
        assert!(p.stationary_limit);
        assert_eq!(p.lambda, 0.0);
        assert!(p.c.is_finite());
        assert!(transition_params(&baseline_factor1(), 0.0).is_err());
    }

    #[test]
    fn small_step_expansions() {
        // Both ratios equal 1 - κΔt/2 + O(Δt²), so the 2% band at Δt = 0.1
        // needs κ below about 0.4.
        let slow = CirFactor::new(0.3, 0.2, 0.3, 0.05, 1.0).unwrap();
        for f in [slow, baseline_factor1(), baseline_factor2()] {
            let s2 = f.sigma * f.sigma;
            let mut prev = f64::INFINITY;
            for dt in [1.0, 0.5, 0.25, 0.1] {
                let p = transition_params(&f, dt).unwrap();
                let c_err = ((p.c / dt) / (s2 / 4.0) - 1.0).abs();
                let l_err = ((p.lambda * dt) / (4.0 * f.x0 / s2) - 1.0).abs();
                assert!(c_err < prev);
                let x = f.kappa * dt;
                assert!(c_err <= 0.5 * x && l_err <= 0.5 * x, "dt {dt}: {c_err} {l_err}");
                prev = c_err;
            }
            if f.kappa < 0.4 {
                assert!(prev < 0.02);
            }
        }
    }

    #[test]
    fn small_step_noncentrality_with_first_correction() {
        // x/(e^x - 1) = 1 - x/2 + O(x²) with x = κΔt gives
        // λ = 4x₀/(σ²Δt) - 2κx₀/σ² + O(Δt).
        for f in [baseline_factor1(), baseline_factor2()] {
            let s2 = f.sigma * f.sigma;
            let mut prev = f64::INFINITY;
            for dt in [0.4, 0.2, 0.1, 0.05] {
                let p = transition_params(&f, dt).unwrap();
                let approx = 4.0 * f.x0 / (s2 * dt) - 2.0 * f.kappa * f.x0 / s2;
                let err = (p.lambda - approx).abs();
                // remainder is (4x₀/σ²)·κ²Δt/12 to leading order
                let lead = 4.0 * f.x0 / s2 * f.kappa * f.kappa * dt / 12.0;
                assert!((err / lead - 1.0).abs() < 0.1, "dt {dt}: {err} vs {lead}");
                assert!(err < prev);
                prev = err;
            }
        }
    }

    #[test]
    fn mean_identity() {
        for f in [baseline_factor1(), baseline_factor2(), CirFactor::new(0.3, 0.2, 0.3, 0.5, 2.5).unwrap()] {
            for dt in [0.01, 0.05, 0.25, 1.0, 7.0] {
                let p = transition_params(&f, dt).unwrap();
                let e = (-f.kappa * dt).exp();
                let want = f.weight * (f.x0 * e + f.theta * (1.0 - e));
                assert!(((p.mean() - want) / want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = transition_params(&baseline_factor1(), 1.0).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..100).map(|_| sample_transition(&p, &mut a)).collect();
        let ys: Vec<f64> = (0..100).map(|_| sample_transition(&p, &mut b)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn exponential_special_case() {
        let p = TransitionParams { c: 0.5, d: 2.0, lambda: 0.0, beta: 1.0, dt: 1.0, stationary_limit: false };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let m: f64 = (0..n).map(|_| sample_transition(&p, &mut rng)).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.004, "{m}");
    }

    #[test]
    fn sampler_mean_matches_moment_formula() {
        let p = transition_params(&baseline_factor1(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_transition(&p, &mut rng)).collect();
        let m = draws.iter().sum::<f64>() / n as f64;
        let se = (p.variance() / n as f64).sqrt();
        let want = p.c * (p.d + p.lambda);
        assert!((m - want).abs() < 4.0 * se, "{m} vs {want} (se {se})");
    }

    #[test]
    fn central_case_is_single_gamma() {
        let f = baseline_factor1().with_x0(0.0).unwrap();
        let p = transition_params(&f, 1.0).unwrap();
        for &s in &[1e-3, 0.02, 0.1] {
            let r = single_factor_pdf(&p, s, &TruncationPolicy::default()).unwrap();
            let want = ln_gamma_density(p.d / 2.0, p.beta, s).exp();
            assert_eq!(r.terms.n1, (0, 0));
            assert!(((r.value - want) / want).abs() < 1e-14);
        }
    }

    #[test]
    fn single_factor_pdf_normalizes() {
        let f = baseline_factor2();
        for dt in [1.0, 0.05] {
            let p = transition_params(&f, dt).unwrap();
            let pol = TruncationPolicy::default();
            let hi = p.mean() + 40.0 * p.variance().sqrt();
            let pts: Vec<f64> = (0..=16).map(|i| hi * i as f64 / 16.0).collect();
            let q = integrate_pieces(
                |s| if s > 0.0 { single_factor_pdf(&p, s, &pol).unwrap().value } else { 0.0 },
                &pts,
                QuadOptions::tol(1e-12, 1e-12),
            )
            .unwrap();
            assert!((q.value - 1.0).abs() < 1e-9, "dt {dt}: {}", q.value);
        }
    }

    #[test]
    fn rejects_nonpositive_argument() {
        let p = transition_params(&baseline_factor1(), 1.0).unwrap();
        assert!(single_factor_pdf(&p, 0.0, &TruncationPolicy::default()).is_err());
        assert!(single_factor_pdf(&p, -1.0, &TruncationPolicy::default()).is_err());
    }
}
