//! Exact likelihood of observed sums and a bounded simplex search over the
//! rate, level and volatility parameters of both factors.
//!
//! Parameters are indexed `[κ₁, θ₁, σ₁, κ₂, θ₂, σ₂]`. Starting values, weights
//! and the step are taken from a template model and never fitted.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cir::CirFactor;
use crate::error::{Error, Result};
use crate::mixture::SumModel;
use crate::truncation::TruncationPolicy;

pub const PARAM_NAMES: [&str; 6] = ["kappa1", "theta1", "sigma1", "kappa2", "theta2", "sigma2"];

/// Density floor applied before taking logs.
pub const PDF_FLOOR: f64 = 1e-300;

/// Truncation tolerance ceiling for likelihood work.
pub const LIKELIHOOD_EPS: f64 = 1e-10;

/// Relative simplex diameter at which a search stops.
pub const DIAMETER_TOL: f64 = 1e-6;

pub const N_STARTS: usize = 5;

pub type Point = [f64; 6];

/// Index of a parameter name in [`PARAM_NAMES`].
pub fn param_index(name: &str) -> Option<usize> {
    PARAM_NAMES.iter().position(|&n| n == name)
}

/// Observations plus the search box.
#[derive(Debug, Clone)]
pub struct FitSpec {
    observations: Vec<f64>,
    template: SumModel,
    free: [bool; 6],
    lower: Point,
    upper: Point,
    adjustments: Vec<String>,
}

fn point_of(m: &SumModel) -> Point {
    let (f1, f2) = (m.factor1(), m.factor2());
    [f1.kappa, f1.theta, f1.sigma, f2.kappa, f2.theta, f2.sigma]
}

impl FitSpec {
    /// `bounds[i]` is read only for free parameters; fixed ones sit at their
    /// template value. The box is shrunk, if needed, until every corner obeys
    /// both Feller conditions: first the upper σ, then the lower κ, then the
    /// lower θ. Fails when none of those moves is available.
    pub fn new(observations: Vec<f64>, template: SumModel, free: [bool; 6], bounds: [(f64, f64); 6]) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::domain("FitSpec", "no observations"));
        }
        if let Some(i) = observations.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::domain("FitSpec", format!("observation {i} is {} (must be positive)", observations[i])));
        }
        let fixed = point_of(&template);
        let mut lower = fixed;
        let mut upper = fixed;
        for i in 0..6 {
            if free[i] {
                let (lo, hi) = bounds[i];
                if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                    return Err(Error::config(PARAM_NAMES[i], format!("bounds [{lo}, {hi}] must be positive with lo < hi")));
                }
                lower[i] = lo;
                upper[i] = hi;
            }
        }
        let mut adjustments = Vec::new();
        for base in [0, 3] {
            let (k, th, sg) = (base, base + 1, base + 2);
            let ok = |l: &Point, u: &Point| 2.0 * l[k] * l[th] >= u[sg] * u[sg];
            if ok(&lower, &upper) {
                continue;
            }
            let sg_new = (2.0 * lower[k] * lower[th]).sqrt() * (1.0 - 1e-12);
            let k_new = upper[sg] * upper[sg] / (2.0 * lower[th]) * (1.0 + 1e-12);
            if free[sg] && sg_new > lower[sg] {
                adjustments.push(format!("{} upper bound {} -> {}", PARAM_NAMES[sg], upper[sg], sg_new));
                upper[sg] = sg_new;
            } else if free[k] && k_new < upper[k] {
                adjustments.push(format!("{} lower bound {} -> {}", PARAM_NAMES[k], lower[k], k_new));
                lower[k] = k_new;
            } else {
                let th_new = upper[sg] * upper[sg] / (2.0 * lower[k]) * (1.0 + 1e-12);
                if free[th] && th_new < upper[th] {
                    adjustments.push(format!("{} lower bound {} -> {}", PARAM_NAMES[th], lower[th], th_new));
                    lower[th] = th_new;
                } else {
                    return Err(Error::Feller { lhs: 2.0 * lower[k] * lower[th], rhs: upper[sg] * upper[sg] });
                }
            }
            debug_assert!(ok(&lower, &upper));
        }
        Ok(FitSpec { observations, template, free, lower, upper, adjustments })
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }
    pub fn template(&self) -> &SumModel {
        &self.template
    }
    pub fn free(&self) -> [bool; 6] {
        self.free
    }
    pub fn n_free(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }
    pub fn lower(&self) -> Point {
        self.lower
    }
    pub fn upper(&self) -> Point {
        self.upper
    }
    /// Bound changes made to satisfy Feller, in the order applied.
    pub fn adjustments(&self) -> &[String] {
        &self.adjustments
    }

    /// Template point; fixed entries of any candidate come from here.
    pub fn fixed_point(&self) -> Point {
        point_of(&self.template)
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..6).all(|i| {
            let slack = 1e-12 * self.upper[i];
            p[i] >= self.lower[i] - slack && p[i] <= self.upper[i] + slack
        })
    }

    /// The template with the six parameters replaced.
    pub fn model_at(&self, p: &Point) -> Result<SumModel> {
        let (f1, f2) = (self.template.factor1(), self.template.factor2());
        SumModel::new(
            CirFactor { kappa: p[0], theta: p[1], sigma: p[2], ..*f1 },
            CirFactor { kappa: p[3], theta: p[4], sigma: p[5], ..*f2 },
            self.template.dt(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Likelihood {
    pub nll: f64,
    /// Observations whose density was raised to [`PDF_FLOOR`].
    pub floored: Vec<usize>,
}

/// `-Σ ln max(pdf(sᵢ), 1e-300)` at `point`.
pub fn neg_log_likelihood(spec: &FitSpec, point: &Point, t: &TruncationPolicy) -> Result<Likelihood> {
    if !spec.contains(point) {
        return Err(Error::domain("neg_log_likelihood", format!("point {point:?} outside the search box")));
    }
    let model = spec.model_at(point)?;
    let ev = model.evaluator(&t.tightened(LIKELIHOOD_EPS))?;
    let dens = ev.pdf_many(&spec.observations)?;
    let mut floored = Vec::new();
    let mut nll = 0.0;
    for (i, r) in dens.iter().enumerate() {
        let v = if r.value < PDF_FLOOR {
            floored.push(i);
            PDF_FLOOR
        } else {
            r.value
        };
        nll -= v.ln();
    }
    Ok(Likelihood { nll, floored })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Simplex diameter fell below [`DIAMETER_TOL`] in log coordinates.
    Converged,
    /// Evaluation budget used up first.
    Budget,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub initial: Point,
    pub initial_nll: f64,
    pub point: Point,
    pub nll: f64,
    pub evaluations: usize,
    pub stop: StopReason,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub point: Point,
    pub nll: f64,
    pub evaluations: usize,
    /// Stop reason of the winning start.
    pub stop: StopReason,
    /// Final simplex diameter of the winning start, log coordinates.
    pub diameter: f64,
    pub starts: Vec<StartRecord>,
    pub floored: Vec<usize>,
}

pub const DIAGNOSTICS_HEADER: &str =
    "kappa1,theta1,sigma1,kappa2,theta2,sigma2,nll,evaluations,stop,diameter,floored";

impl FitResult {
    /// `name=value` lines: the six parameters, then nll, evaluations, stop.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        for (name, v) in PARAM_NAMES.iter().zip(self.point) {
            let _ = writeln!(out, "{name}={v}");
        }
        let _ = writeln!(out, "nll={}", self.nll);
        let _ = writeln!(out, "evaluations={}", self.evaluations);
        let _ = writeln!(out, "stop={}", self.stop.as_str());
        out
    }

    pub fn diagnostics_row(&self) -> String {
        let p = self.point;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            p[0],
            p[1],
            p[2],
            p[3],
            p[4],
            p[5],
            self.nll,
            self.evaluations,
            self.stop.as_str(),
            self.diameter,
            self.floored.len()
        )
    }
}

/// Deterministic Latin-hypercube starts in log coordinates: in every free
/// dimension the five starts fall in five different strata, at stratum
/// centres.
pub fn latin_starts(spec: &FitSpec) -> Vec<Point> {
    let fixed = spec.fixed_point();
    (0..N_STARTS)
        .map(|j| {
            let mut p = fixed;
            let mut dim = 0;
            for i in 0..6 {
                if spec.free[i] {
                    let stride = 1 + dim % (N_STARTS - 1);
                    let stratum = (j * stride + dim) % N_STARTS;
                    let u = (stratum as f64 + 0.5) / N_STARTS as f64;
                    let (lo, hi) = (spec.lower[i].ln(), spec.upper[i].ln());
                    p[i] = (lo + u * (hi - lo)).exp();
                    dim += 1;
                }
            }
            p
        })
        .collect()
}

/// Bounded simplex search from each of [`latin_starts`], the budget split
/// evenly between starts. Returns the best point found.
pub fn fit_mle(spec: &FitSpec, t: &TruncationPolicy, budget: usize) -> Result<FitResult> {
    if budget < 100 {
        return Err(Error::domain("fit_mle", format!("budget must be at least 100, got {budget}")));
    }
    if spec.n_free() == 0 {
        let p = spec.fixed_point();
        let l = neg_log_likelihood(spec, &p, t)?;
        return Ok(FitResult {
            point: p,
            nll: l.nll,
            evaluations: 1,
            stop: StopReason::Converged,
            diameter: 0.0,
            starts: Vec::new(),
            floored: l.floored,
        });
    }
    let free: Vec<usize> = (0..6).filter(|&i| spec.free[i]).collect();
    let lo: Vec<f64> = free.iter().map(|&i| spec.lower[i].ln()).collect();
    let hi: Vec<f64> = free.iter().map(|&i| spec.upper[i].ln()).collect();
    let embed = |y: &[f64]| -> Point {
        let mut p = spec.fixed_point();
        for (k, &i) in free.iter().enumerate() {
            p[i] = y[k].exp().clamp(spec.lower[i], spec.upper[i]);
        }
        p
    };

    let mut starts = Vec::with_capacity(N_STARTS);
    for (j, init) in latin_starts(spec).into_iter().enumerate() {
        let share = budget / N_STARTS + usize::from(j < budget % N_STARTS);
        let y0: Vec<f64> = free.iter().map(|&i| init[i].ln()).collect();
        let mut f = |y: &[f64]| neg_log_likelihood(spec, &embed(y), t).map(|l| l.nll);
        let run = nelder_mead(&mut f, &y0, &lo, &hi, share)?;
        starts.push(StartRecord {
            initial: init,
            initial_nll: run.initial_value,
            point: embed(&run.best),
            nll: run.value,
            evaluations: run.evaluations,
            stop: run.stop,
            diameter: run.diameter,
        });
    }
    let best = starts
        .iter()
        .min_by(|a, b| a.nll.total_cmp(&b.nll))
        .cloned()
        .expect("at least one start");
    let floored = neg_log_likelihood(spec, &best.point, t)?.floored;
    Ok(FitResult {
        point: best.point,
        nll: best.nll,
        evaluations: starts.iter().map(|s| s.evaluations).sum(),
        stop: best.stop,
        diameter: best.diameter,
        starts,
        floored,
    })
}

struct SimplexRun {
    best: Vec<f64>,
    value: f64,
    initial_value: f64,
    evaluations: usize,
    stop: StopReason,
    diameter: f64,
}

fn project(y: &mut [f64], lo: &[f64], hi: &[f64]) {
    for k in 0..y.len() {
        y[k] = y[k].clamp(lo[k], hi[k]);
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Nelder–Mead with every trial point projected onto the box.
fn nelder_mead<F>(f: &mut F, y0: &[f64], lo: &[f64], hi: &[f64], budget: usize) -> Result<SimplexRun>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = y0.len();
    let mut evals = 0usize;
    let mut eval = |y: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        f(y)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(y0, &mut evals)?;
    simplex.push((y0.to_vec(), f0));
    for k in 0..n {
        let mut v = y0.to_vec();
        let h = 0.1 * (hi[k] - lo[k]);
        v[k] = if v[k] + h <= hi[k] { v[k] + h } else { v[k] - h };
        project(&mut v, lo, hi);
        let fv = eval(&v, &mut evals)?;
        simplex.push((v, fv));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);

    let stop = loop {
        if diameter(&simplex) < DIAMETER_TOL {
            break StopReason::Converged;
        }
        if evals + 2 > budget {
            break StopReason::Budget;
        }
        let centroid: Vec<f64> =
            (0..n).map(|k| simplex[..n].iter().map(|(v, _)| v[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut y: Vec<f64> = (0..n).map(|k| centroid[k] + t * (worst.0[k] - centroid[k])).collect();
            project(&mut y, lo, hi);
            y
        };
        let yr = along(-1.0);
        let fr = eval(&yr, &mut evals)?;
        if fr < simplex[0].1 {
            let ye = along(-2.0);
            let fe = eval(&ye, &mut evals)?;
            simplex[n] = if fe < fr { (ye, fe) } else { (yr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (yr, fr);
        } else {
            let (yc, fc) = if fr < worst.1 {
                let y = along(-0.5);
                let v = eval(&y, &mut evals)?;
                (y, v)
            } else {
                let y = along(0.5);
                let v = eval(&y, &mut evals)?;
                (y, v)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (yc, fc);
            } else {
                if evals + n > budget {
                    break StopReason::Budget;
                }
                let best = simplex[0].0.clone();
                for (v, fv) in simplex[1..].iter_mut() {
                    for k in 0..n {
                        v[k] = best[k] + 0.5 * (v[k] - best[k]);
                    }
                    *fv = eval(v, &mut evals)?;
                }
            }
        }
        order(&mut simplex);
    };
    Ok(SimplexRun {
        best: simplex[0].0.clone(),
        value: simplex[0].1,
        initial_value: f0,
        evaluations: evals,
        stop,
        diameter: diameter(&simplex),
    })
}

/// One-column CSV with header `s`; blank lines and `#` comments are skipped.
pub fn parse_observations(text: &str) -> Result<Vec<f64>> {
    let mut rows = text.lines().map(str::trim).enumerate().filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match rows.next() {
        Some((_, "s")) => {}
        Some((i, l)) => return Err(Error::config("data", format!("line {}: expected header `s`, found `{l}`", i + 1))),
        None => return Err(Error::config("data", "empty file")),
    }
    rows.map(|(i, l)| l.parse::<f64>().map_err(|_| Error::config("data", format!("line {}: bad number `{l}`", i + 1))))
        .collect()
}
