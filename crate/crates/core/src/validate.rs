//! Monte Carlo and quadrature checks of the analytic law.
//!
//! Sampling is split into fixed shards of [`SHARD_SIZE`] draws. Shard `i`
//! uses `ChaCha8Rng::seed_from_u64(seed)` moved to stream `i`, so the sample
//! set depends only on `(model, n, seed)` and never on the thread count.

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cir::{MarginalPdf, TransitionSampler};
use crate::error::{Error, Result};
use crate::mixture::{Evaluator, SumModel};
use crate::quad::{integrate_pieces, QuadOptions};
use crate::truncation::TruncationPolicy;

pub const SHARD_SIZE: usize = 65_536;

/// 99% critical value of the Kolmogorov distribution.
pub const KS_CRITICAL_99: f64 = 1.63;

/// Minimum number of nonempty histogram bins for a usable density comparison.
pub const MIN_NONZERO_BINS: usize = 100;

/// Nodes of the CDF interpolant used for the KS statistic.
pub const CDF_NODES: usize = 2048;

/// `n` exact draws of `S`, one `sample_transition` per factor per draw.
pub fn simulate_sum(m: &SumModel, n: usize, seed: u64) -> Vec<f64> {
    let s1 = TransitionSampler::new(m.derived1());
    let s2 = TransitionSampler::new(m.derived2());
    let mut out = vec![0.0; n];
    out.par_chunks_mut(SHARD_SIZE).enumerate().for_each(|(shard, chunk)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard as u64);
        for x in chunk.iter_mut() {
            *x = s1.sample(&mut rng) + s2.sample(&mut rng);
        }
    });
    out
}

/// Shortest round-trip text for `x`, in exponent form outside `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Empirical quantile: the `⌈p·n⌉`-th smallest value.
pub fn empirical_quantile(samples: &[f64], p: f64) -> f64 {
    assert!(!samples.is_empty());
    let k = ((p * samples.len() as f64).ceil() as usize).clamp(1, samples.len()) - 1;
    let mut v = samples.to_vec();
    let (_, x, _) = v.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    *x
}

/// `Σ (f̂ᵢ - fᵢ)² · width`.
pub fn ise(histogram: &[f64], analytic: &[f64], width: f64) -> f64 {
    assert_eq!(histogram.len(), analytic.len());
    histogram.iter().zip(analytic).map(|(h, f)| (h - f) * (h - f) * width).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityComparison {
    pub upper: f64,
    pub width: f64,
    pub midpoints: Vec<f64>,
    pub histogram: Vec<f64>,
    pub analytic: Vec<f64>,
    pub nonzero_bins: usize,
    pub ise: f64,
    /// Largest certified truncation bound among the analytic values.
    pub max_trunc_bound: f64,
}

/// Histogram on `n_bins` equal bins over `[0, empirical p99.9]` against the
/// analytic density at the bin midpoints.
///
/// The histogram is normalized by the full sample size, so draws above the
/// upper edge lower every bin just as they would for the true density.
pub fn density_comparison(ev: &Evaluator<'_>, samples: &[f64], n_bins: usize) -> Result<DensityComparison> {
    if n_bins < 50 {
        return Err(Error::domain("density_comparison", format!("need at least 50 bins, got {n_bins}")));
    }
    if samples.is_empty() {
        return Err(Error::Degenerate("no samples".into()));
    }
    let upper = empirical_quantile(samples, 0.999);
    if !(upper > 0.0) {
        return Err(Error::Degenerate(format!("99.9th percentile is {upper}")));
    }
    let width = upper / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &x in samples {
        if (0.0..=upper).contains(&x) {
            let b = ((x / width) as usize).min(n_bins - 1);
            counts[b] += 1;
        }
    }
    let nonzero_bins = counts.iter().filter(|&&c| c > 0).count();
    if nonzero_bins < MIN_NONZERO_BINS {
        return Err(Error::Degenerate(format!(
            "only {nonzero_bins} nonempty bins out of {n_bins} (need {MIN_NONZERO_BINS})"
        )));
    }
    let n = samples.len() as f64;
    let histogram: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let midpoints: Vec<f64> = (0..n_bins).map(|i| (i as f64 + 0.5) * width).collect();
    let evals = ev.pdf_many(&midpoints)?;
    let analytic: Vec<f64> = evals.iter().map(|r| r.value).collect();
    let max_trunc_bound = evals.iter().map(|r| r.trunc_error_bound).fold(0.0, f64::max);
    let ise = ise(&histogram, &analytic, width);
    Ok(DensityComparison { upper, width, midpoints, histogram, analytic, nonzero_bins, ise, max_trunc_bound })
}

/// Expected ISE of a histogram built from `n` exact draws with the given bins,
/// `Σ pᵢ(1-pᵢ)/(n·width) + Σ (pᵢ/width - f(midᵢ))²·width`, where `pᵢ` is the
/// exact bin probability. The first sum is pure sampling noise.
pub fn expected_ise(ev: &Evaluator<'_>, dc: &DensityComparison, n: usize) -> Result<f64> {
    let edges: Vec<f64> = (0..=dc.midpoints.len()).map(|i| i as f64 * dc.width).collect();
    let mut cdf = vec![0.0];
    cdf.extend(ev.cdf_many(&edges[1..])?.iter().map(|r| r.value));
    let w = dc.width;
    Ok(cdf
        .windows(2)
        .zip(&dc.analytic)
        .map(|(c, f)| {
            let p = c[1] - c[0];
            p * (1.0 - p) / (n as f64 * w) + (p / w - f).powi(2) * w
        })
        .sum())
}

/// `sup |ECDF - F|` over a sorted sample, checking both sides of each jump.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Piecewise-cubic Hermite interpolant of the CDF using the density as slope.
#[derive(Debug, Clone)]
pub struct CdfInterpolant {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// Largest certified truncation bound at the nodes.
    pub max_trunc_bound: f64,
}

impl CdfInterpolant {
    /// Nodes equally spaced over `[lo, hi]` with `lo > 0`.
    pub fn new(ev: &Evaluator<'_>, lo: f64, hi: f64, count: usize) -> Result<Self> {
        assert!(count >= 2 && lo > 0.0 && hi > lo);
        let nodes: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
        let cdfs = ev.cdf_many(&nodes)?;
        let pdfs = ev.pdf_many(&nodes)?;
        let max_trunc_bound = cdfs.iter().map(|r| r.trunc_error_bound).fold(0.0, f64::max);
        Ok(CdfInterpolant {
            nodes,
            values: cdfs.iter().map(|r| r.value).collect(),
            slopes: pdfs.iter().map(|r| r.value).collect(),
            max_trunc_bound,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        let (lo, hi) = (self.nodes[0], self.nodes[n - 1]);
        if x <= lo {
            return self.values[0];
        }
        if x >= hi {
            return self.values[n - 1];
        }
        let h = (hi - lo) / (n - 1) as f64;
        let i = (((x - lo) / h) as usize).min(n - 2);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let w = x1 - x0;
        let t = (x - x0) / w;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        (h00 * self.values[i] + h10 * w * self.slopes[i] + h01 * self.values[i + 1] + h11 * w * self.slopes[i + 1])
            .clamp(0.0, 1.0)
    }

    /// Largest interpolation error at the midpoints of the first `probes` cells
    /// spread across the range, measured against direct evaluation.
    pub fn midpoint_error(&self, ev: &Evaluator<'_>, probes: usize) -> Result<f64> {
        let n = self.nodes.len() - 1;
        let step = (n / probes.max(1)).max(1);
        let mids: Vec<f64> = (0..n).step_by(step).map(|i| 0.5 * (self.nodes[i] + self.nodes[i + 1])).collect();
        let exact = ev.cdf_many(&mids)?;
        Ok(mids.iter().zip(&exact).map(|(&x, r)| (self.eval(x) - r.value).abs()).fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfComparison {
    pub ks_sup: f64,
    /// `1.63/√n + max_trunc_bound`.
    pub threshold: f64,
    pub max_trunc_bound: f64,
    /// Interpolation error measured at cell midpoints.
    pub interp_error: f64,
}

/// KS distance between the sample ECDF and the analytic CDF at every sample.
///
/// The analytic CDF is read through a [`CdfInterpolant`] on [`CDF_NODES`]
/// nodes spanning the sample range; its error is measured and reported.
pub fn cdf_comparison(ev: &Evaluator<'_>, samples: &[f64]) -> Result<CdfComparison> {
    if samples.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 samples, got {}", samples.len())));
    }
    let mut sorted = samples.to_vec();
    sorted.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Degenerate(format!("sample range [{lo}, {hi}] is not a positive interval")));
    }
    let interp = CdfInterpolant::new(ev, lo, hi, CDF_NODES)?;
    let interp_error = interp.midpoint_error(ev, 64)?;
    let ks_sup = ks_statistic(&sorted, |x| interp.eval(x));
    let n = samples.len() as f64;
    Ok(CdfComparison {
        ks_sup,
        threshold: KS_CRITICAL_99 / n.sqrt() + interp.max_trunc_bound,
        max_trunc_bound: interp.max_trunc_bound,
        interp_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCrosscheck {
    pub pdf_max_abs_err: f64,
    pub cdf_max_abs_err: f64,
    pub points: usize,
}

/// Mixture density against quadrature of `∫₀^s f₁(u) f₂(s-u) du` over the two
/// marginal transition densities, and mixture CDF against quadrature of the
/// mixture density.
pub fn oracle_crosscheck(ev: &Evaluator<'_>, grid: &[f64]) -> Result<OracleCrosscheck> {
    if grid.len() < 6 {
        return Err(Error::domain("oracle_crosscheck", format!("need at least 6 points, got {}", grid.len())));
    }
    if grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::domain("oracle_crosscheck", "grid points must be positive"));
    }
    let m = ev.model();
    let tight = TruncationPolicy::tail(1e-15);
    let f1 = MarginalPdf::new(m.derived1(), &tight)?;
    let f2 = MarginalPdf::new(m.derived2(), &tight)?;
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, max_panels: 100_000 };
    let errs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&s| -> Result<(f64, f64)> {
            let pts: Vec<f64> = (0..=32).map(|i| s * i as f64 / 32.0).collect();
            let conv = integrate_pieces(
                |u| {
                    let v = s - u;
                    if u <= 0.0 || v <= 0.0 {
                        return 0.0;
                    }
                    f1.eval(u).map(|r| r.value).unwrap_or(f64::NAN) * f2.eval(v).map(|r| r.value).unwrap_or(f64::NAN)
                },
                &pts,
                opts,
            )?;
            let integral = integrate_pieces(
                |x| if x > 0.0 { ev.pdf(x).map(|r| r.value).unwrap_or(f64::NAN) } else { 0.0 },
                &pts,
                opts,
            )?;
            let pdf = ev.pdf(s)?.value;
            let cdf = ev.cdf(s)?.value;
            Ok(((pdf - conv.value).abs(), (cdf - integral.value).abs()))
        })
        .collect::<Result<_>>()?;
    Ok(OracleCrosscheck {
        pdf_max_abs_err: errs.iter().map(|e| e.0).fold(0.0, f64::max),
        cdf_max_abs_err: errs.iter().map(|e| e.1).fold(0.0, f64::max),
        points: grid.len(),
    })
}

/// Model inputs echoed into a report, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub kappa1: f64,
    pub theta1: f64,
    pub sigma1: f64,
    pub x01: f64,
    pub a1: f64,
    pub kappa2: f64,
    pub theta2: f64,
    pub sigma2: f64,
    pub x02: f64,
    pub a2: f64,
    pub dt: f64,
    pub seed: u64,
}

impl ParamsEcho {
    pub fn new(m: &SumModel, seed: u64) -> Self {
        let (f1, f2) = (m.factor1(), m.factor2());
        ParamsEcho {
            kappa1: f1.kappa,
            theta1: f1.theta,
            sigma1: f1.sigma,
            x01: f1.x0,
            a1: f1.weight,
            kappa2: f2.kappa,
            theta2: f2.theta,
            sigma2: f2.sigma,
            x02: f2.x0,
            a2: f2.weight,
            dt: m.dt(),
            seed,
        }
    }
}

/// Wall-clock time of one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTime {
    pub phase: String,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub params: ParamsEcho,
    pub n_samples: usize,
    pub n_bins: usize,
    pub ise: f64,
    pub ks_sup: f64,
    pub mean_delta_sigmas: f64,
    pub var_delta_sigmas: f64,
    pub runtime_ms: Vec<PhaseTime>,
}

pub const CSV_HEADER: &str = "kappa1,theta1,sigma1,x01,a1,kappa2,theta2,sigma2,x02,a2,dt,seed,n_samples,n_bins,ise,ks_sup,mean_delta_sigmas,var_delta_sigmas,runtime_ms";

impl ValidationReport {
    /// One CSV row; phases in the last column as `name:ms` joined by `;`.
    pub fn to_csv_row(&self) -> String {
        let p = &self.params;
        let runtime: Vec<String> = self.runtime_ms.iter().map(|t| format!("{}:{}", t.phase, format_number(t.ms))).collect();
        let nums = [
            p.kappa1, p.theta1, p.sigma1, p.x01, p.a1, p.kappa2, p.theta2, p.sigma2, p.x02, p.a2, p.dt,
        ];
        let mut cols: Vec<String> = nums.iter().map(|&x| format_number(x)).collect();
        cols.push(p.seed.to_string());
        cols.push(self.n_samples.to_string());
        cols.push(self.n_bins.to_string());
        for x in [self.ise, self.ks_sup, self.mean_delta_sigmas, self.var_delta_sigmas] {
            cols.push(format_number(x));
        }
        cols.push(runtime.join(";"));
        cols.join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let cols: Vec<&str> = row.trim_end_matches(['\r', '\n']).split(',').collect();
        if cols.len() != 19 {
            return Err(Error::config("report", format!("expected 19 columns, found {}", cols.len())));
        }
        let f = |i: usize| -> Result<f64> {
            cols[i].parse().map_err(|_| Error::config("report", format!("column {i}: bad number `{}`", cols[i])))
        };
        let u = |i: usize| -> Result<u64> {
            cols[i].parse().map_err(|_| Error::config("report", format!("column {i}: bad integer `{}`", cols[i])))
        };
        let mut runtime_ms = Vec::new();
        if !cols[18].is_empty() {
            for item in cols[18].split(';') {
                let (phase, ms) = item
                    .split_once(':')
                    .ok_or_else(|| Error::config("report", format!("bad runtime entry `{item}`")))?;
                let ms = ms.parse().map_err(|_| Error::config("report", format!("bad runtime entry `{item}`")))?;
                runtime_ms.push(PhaseTime { phase: phase.to_string(), ms });
            }
        }
        Ok(ValidationReport {
            params: ParamsEcho {
                kappa1: f(0)?,
                theta1: f(1)?,
                sigma1: f(2)?,
                x01: f(3)?,
                a1: f(4)?,
                kappa2: f(5)?,
                theta2: f(6)?,
                sigma2: f(7)?,
                x02: f(8)?,
                a2: f(9)?,
                dt: f(10)?,
                seed: u(11)?,
            },
            n_samples: u(12)? as usize,
            n_bins: u(13)? as usize,
            ise: f(14)?,
            ks_sup: f(15)?,
            mean_delta_sigmas: f(16)?,
            var_delta_sigmas: f(17)?,
            runtime_ms,
        })
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "factor 1: kappa={} theta={} sigma={} x0={} a={}", p.kappa1, p.theta1, p.sigma1, p.x01, p.a1)?;
        writeln!(f, "factor 2: kappa={} theta={} sigma={} x0={} a={}", p.kappa2, p.theta2, p.sigma2, p.x02, p.a2)?;
        writeln!(f, "dt={} seed={} n_samples={} n_bins={}", p.dt, p.seed, self.n_samples, self.n_bins)?;
        writeln!(f, "ise={:e}", self.ise)?;
        writeln!(f, "ks_sup={:e}", self.ks_sup)?;
        writeln!(f, "mean_delta_sigmas={:.3}", self.mean_delta_sigmas)?;
        writeln!(f, "var_delta_sigmas={:.3}", self.var_delta_sigmas)?;
        for t in &self.runtime_ms {
            writeln!(f, "runtime_ms.{}={:.1}", t.phase, t.ms)?;
        }
        Ok(())
    }
}

/// Sample mean and variance deviations from the closed forms, in standard
/// errors. The variance standard error uses the sample fourth central moment.
pub fn moment_deltas(m: &SumModel, samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let (mean, var) = m.moments();
    let sm = samples.iter().sum::<f64>() / n;
    let (m2, m4) = samples.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - sm;
        (a + d * d, b + d * d * d * d)
    });
    let sv = m2 / (n - 1.0);
    let m4 = m4 / n;
    let mean_se = (var / n).sqrt();
    let var_se = ((m4 - sv * sv) / n).sqrt();
    ((sm - mean) / mean_se, (sv - var) / var_se)
}

/// One pass/fail line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {:e} (threshold {:e})", self.name, self.value, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOutcome {
    pub report: ValidationReport,
    pub density: DensityComparison,
    pub cdf: CdfComparison,
    pub oracle: OracleCrosscheck,
    pub criteria: Vec<Criterion>,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

pub const ISE_THRESHOLD: f64 = 1e-4;
pub const ORACLE_THRESHOLD: f64 = 1e-8;
pub const MOMENT_SIGMAS: f64 = 4.0;

/// Full check: simulate from `simulated`, compare against `analytic`.
///
/// The two models coincide in ordinary use; a deliberately different
/// analytic model serves as a negative control.
pub fn run_validation(
    analytic: &SumModel,
    simulated: &SumModel,
    t: &TruncationPolicy,
    n_samples: usize,
    n_bins: usize,
    seed: u64,
) -> Result<ValidationOutcome> {
    let mut runtime_ms = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, runtime_ms: &mut Vec<PhaseTime>| {
        runtime_ms.push(PhaseTime { phase: name.to_string(), ms: clock.elapsed().as_secs_f64() * 1e3 });
        clock = Instant::now();
    };

    let samples = simulate_sum(simulated, n_samples, seed);
    lap("simulate", &mut runtime_ms);

    let ev = analytic.evaluator(t)?;
    let density = density_comparison(&ev, &samples, n_bins)?;
    lap("density", &mut runtime_ms);

    let cdf = cdf_comparison(&ev, &samples)?;
    lap("cdf", &mut runtime_ms);

    let (mean, var) = analytic.moments();
    let sd = var.sqrt();
    let grid: Vec<f64> = [-1.5, -0.75, 0.0, 0.75, 1.5, 3.0]
        .iter()
        .map(|z| (mean + z * sd).max(0.05 * mean))
        .collect();
    let oracle = oracle_crosscheck(&ev, &grid)?;
    lap("oracle", &mut runtime_ms);

    let (mean_delta_sigmas, var_delta_sigmas) = moment_deltas(analytic, &samples);
    let report = ValidationReport {
        params: ParamsEcho::new(simulated, seed),
        n_samples,
        n_bins,
        ise: density.ise,
        ks_sup: cdf.ks_sup,
        mean_delta_sigmas,
        var_delta_sigmas,
        runtime_ms,
    };
    let crit = |name: &str, value: f64, threshold: f64, pass: bool| Criterion {
        name: name.to_string(),
        value,
        threshold,
        pass,
    };
    let criteria = vec![
        crit("ise", density.ise, ISE_THRESHOLD, density.ise < ISE_THRESHOLD),
        crit("ks_sup", cdf.ks_sup, cdf.threshold, cdf.ks_sup <= cdf.threshold),
        crit("mean_delta_sigmas", mean_delta_sigmas.abs(), MOMENT_SIGMAS, mean_delta_sigmas.abs() <= MOMENT_SIGMAS),
        crit("var_delta_sigmas", var_delta_sigmas.abs(), MOMENT_SIGMAS, var_delta_sigmas.abs() <= MOMENT_SIGMAS),
        crit("oracle_pdf", oracle.pdf_max_abs_err, ORACLE_THRESHOLD, oracle.pdf_max_abs_err <= ORACLE_THRESHOLD),
        crit("oracle_cdf", oracle.cdf_max_abs_err, ORACLE_THRESHOLD, oracle.cdf_max_abs_err <= ORACLE_THRESHOLD),
    ];
    Ok(ValidationOutcome { report, density, cdf, oracle, criteria })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cir::CirFactor;

    fn baseline(dt: f64) -> SumModel {
        SumModel::new(
            CirFactor::new(1.2, 0.06, 0.35, 0.009, 1.0).unwrap(),
            CirFactor::new(1.8, 0.009, 0.15, 0.03, 1.0).unwrap(),
            dt,
        )
        .unwrap()
    }

    #[test]
    fn simulation_is_deterministic_and_positive() {
        let m = baseline(1.0);
        let a = simulate_sum(&m, 200_000, 42);
        let b = simulate_sum(&m, 200_000, 42);
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x > 0.0));
        let c = simulate_sum(&m, 200_000, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn shards_do_not_depend_on_thread_count() {
        let m = baseline(0.25);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| simulate_sum(&m, 3 * SHARD_SIZE + 17, 5));
        let many = simulate_sum(&m, 3 * SHARD_SIZE + 17, 5);
        assert_eq!(single, many);
        // a prefix of a longer run is the shorter run
        let short = simulate_sum(&m, SHARD_SIZE + 3, 5);
        assert_eq!(&many[..SHARD_SIZE + 3], &short[..]);
    }

    #[test]
    fn sample_mean_within_four_standard_errors() {
        let m = baseline(1.0);
        let xs = simulate_sum(&m, 1_000_000, 9);
        let (dm, dv) = moment_deltas(&m, &xs);
        assert!(dm.abs() < 4.0 && dv.abs() < 4.0, "{dm} {dv}");
    }

    #[test]
    fn ise_of_identical_curves_is_zero() {
        let f = vec![0.5, 1.0, 2.0, 0.1];
        assert_eq!(ise(&f, &f, 0.01), 0.0);
        assert!((ise(&[1.0, 1.0], &[0.0, 2.0], 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_comparison_preconditions() {
        let m = baseline(1.0);
        let ev = m.evaluator(&TruncationPolicy::default()).unwrap();
        let xs = simulate_sum(&m, 1000, 1);
        assert!(density_comparison(&ev, &xs, 20).is_err());
        // only a handful of distinct values: too few occupied bins
        let few: Vec<f64> = (0..5000).map(|i| 0.01 + 0.001 * (i % 7) as f64).collect();
        assert!(matches!(density_comparison(&ev, &few, 200), Err(Error::Degenerate(_))));
    }

    #[test]
    fn ise_matches_sampling_noise() {
        let m = baseline(1.0);
        let ev = m.evaluator(&TruncationPolicy::default()).unwrap();
        let n = 1_000_000;
        let xs = simulate_sum(&m, n, 11);
        let dc = density_comparison(&ev, &xs, 200).unwrap();
        let predicted = expected_ise(&ev, &dc, n).unwrap();
        let ratio = dc.ise / predicted;
        assert!((0.6..1.4).contains(&ratio), "ise {} predicted {predicted}", dc.ise);
        // the floor alone already exceeds 1e-4 at this sample size
        assert!(predicted > 1e-4);
    }

    #[test]
    fn halving_the_sample_raises_ise() {
        let m = baseline(0.25);
        let ev = m.evaluator(&TruncationPolicy::default()).unwrap();
        let (mut full, mut half) = (0.0, 0.0);
        for seed in 0..5 {
            let xs = simulate_sum(&m, 200_000, seed);
            full += density_comparison(&ev, &xs, 200).unwrap().ise;
            half += density_comparison(&ev, &xs[..100_000], 200).unwrap().ise;
        }
        assert!(half > full, "{half} {full}");
    }

    #[test]
    fn ks_is_invariant_under_the_probability_transform() {
        let m = baseline(0.25);
        let ev = m.evaluator(&TruncationPolicy::default()).unwrap();
        let mut xs = simulate_sum(&m, 20_000, 3);
        xs.sort_by(|a, b| a.total_cmp(b));
        let interp = CdfInterpolant::new(&ev, xs[0], xs[xs.len() - 1], CDF_NODES).unwrap();
        let direct = ks_statistic(&xs, |x| interp.eval(x));
        let us: Vec<f64> = xs.iter().map(|&x| interp.eval(x)).collect();
        let uniform = ks_statistic(&us, |u| u);
        assert_eq!(direct, uniform);
        assert!(direct <= KS_CRITICAL_99 / (xs.len() as f64).sqrt());
    }

    #[test]
    fn interpolant_is_accurate() {
        let m = baseline(0.05);
        let ev = m.evaluator(&TruncationPolicy::default()).unwrap();
        let (mean, var) = m.moments();
        let sd = var.sqrt();
        let interp = CdfInterpolant::new(&ev, (mean - 5.0 * sd).max(1e-3 * mean), mean + 8.0 * sd, CDF_NODES).unwrap();
        assert!(interp.midpoint_error(&ev, 64).unwrap() < 1e-9);
    }

    #[test]
    fn oracle_crosscheck_on_table1() {
        let m = baseline(0.25);
        let ev = m.evaluator(&TruncationPolicy::default()).unwrap();
        let (mean, var) = m.moments();
        let grid: Vec<f64> = (0..6).map(|i| mean + (i as f64 - 2.0) * 0.7 * var.sqrt()).collect();
        let r = oracle_crosscheck(&ev, &grid).unwrap();
        assert!(r.pdf_max_abs_err <= 1e-8, "{r:?}");
        assert!(r.cdf_max_abs_err <= 1e-8, "{r:?}");
        assert!(oracle_crosscheck(&ev, &grid[..5]).is_err());
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 1.0, 0.1 + 0.2, 1e-5, 2.5e-300, 5e-324, -3.25e17, 123456.789, f64::MAX] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(s.len() < 26, "{s}");
        }
        assert_eq!(format_number(1e-5), "1e-5");
        assert_eq!(format_number(0.25), "0.25");
    }

    #[test]
    fn report_round_trips() {
        let r = ValidationReport {
            params: ParamsEcho::new(&baseline(0.25), 17),
            n_samples: 1000,
            n_bins: 200,
            ise: 1.234_567_890_123e-5,
            ks_sup: 0.012_345,
            mean_delta_sigmas: -0.1 / 3.0,
            var_delta_sigmas: 2.0_f64.sqrt(),
            runtime_ms: vec![
                PhaseTime { phase: "simulate".into(), ms: 12.25 },
                PhaseTime { phase: "cdf".into(), ms: 0.1 + 0.2 },
            ],
        };
        let row = r.to_csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert_eq!(ValidationReport::from_csv_row(&row).unwrap(), r);
        let none = ValidationReport { runtime_ms: vec![], ..r };
        assert_eq!(ValidationReport::from_csv_row(&none.to_csv_row()).unwrap(), none);
        assert!(ValidationReport::from_csv_row("1,2,3").is_err());
    }
}
