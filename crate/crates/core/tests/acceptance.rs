//! Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.
//! Runs as a plain binary so the verdict lines always reach the terminal.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use cirsum::estimate::{fit_mle, FitSpec};
use cirsum::kernel::{kernel_cdf, kernel_pdf, KernelParams};
use cirsum::specfun::{
    kummer_1f1, log_gamma, log_pochhammer, normal_quantile, poisson_tail_quantile, poisson_weights, reg_lower_gamma,
};
use cirsum::validate::{cdf_comparison, density_comparison, expected_ise, oracle_crosscheck, simulate_sum};
use cirsum::{CirFactor, SumModel, TruncationMethod, TruncationPolicy};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erf;
use statrs::function::gamma::{gamma_lr, ln_gamma};

// Tolerances.
const ISE_MAX: f64 = 1e-4;
const ISE_RUNTIME_S: f64 = 60.0;
const KS_CRITICAL: f64 = 1.63;
const LAPLACE_REL: f64 = 1e-10;
const LAPLACE_RUNTIME_S: f64 = 5.0;
const ORACLE_ABS: f64 = 1e-8;
const ORACLE_RUNTIME_S: f64 = 30.0;
const COLLAPSE_REL: f64 = 1e-10;
const MOMENT_QUAD_REL: f64 = 1e-7;
const MOMENT_SE: f64 = 4.0;
const CDF_SERIES_ABS: f64 = 1e-8;
const KAPPA_TOL: f64 = 0.15;
const THETA_SIGMA_REL: f64 = 0.15;
const MLE_RUNTIME_S: f64 = 600.0;

const N_MC: usize = 1_000_000;
const N_BINS: usize = 200;
const SEED: u64 = 1;
const DTS: [f64; 3] = [1.0, 0.25, 0.05];

fn baseline(dt: f64) -> SumModel {
    SumModel::new(
        CirFactor::new(1.2, 0.06, 0.35, 0.009, 1.0).unwrap(),
        CirFactor::new(1.8, 0.009, 0.15, 0.03, 1.0).unwrap(),
        dt,
    )
    .unwrap()
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::tail(1e-10)
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Monte Carlo samples per step, drawn once and shared by criteria 1, 2 and 6.
struct Samples {
    by_dt: Vec<(f64, Vec<f64>, f64)>,
}

impl Samples {
    fn get(&self, dt: f64) -> &[f64] {
        &self.by_dt.iter().find(|(d, ..)| *d == dt).unwrap().1
    }
}

/// Adaptive Simpson, absolute tolerance `tol`.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `∫ f` over `[a, b]` split into `pieces` equal panels.
fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, pieces: usize, tol: f64) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces).map(|i| simpson(f, a + i as f64 * h, a + (i + 1) as f64 * h, tol / pieces as f64)).sum()
}

fn ln_pois(mu: f64, n: u64) -> f64 {
    if mu == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mu + n as f64 * mu.ln() - ln_gamma(n as f64 + 1.0)
}

/// Poisson mass outside `[lo, hi]`, summed term by term.
fn dropped_exact(mu: f64, lo: u64, hi: u64) -> f64 {
    let below: f64 = (0..lo).map(|n| ln_pois(mu, n).exp()).sum();
    let mut above = 0.0;
    let mut n = hi + 1;
    loop {
        let t = ln_pois(mu, n).exp();
        above += t;
        if (n as f64 > mu && t <= 1e-20 * above) || t == 0.0 && n as f64 > mu {
            break;
        }
        n += 1;
    }
    below + above
}

/// Scaled noncentral chi-square density `f(x/scale)/scale` as a Poisson mixture
/// of central chi-square densities.
fn ncx2_pdf(x: f64, k: f64, lambda: f64, scale: f64) -> f64 {
    let y = x / scale;
    let mu = lambda / 2.0;
    let top = (mu + 40.0 * mu.sqrt() + 200.0) as u64;
    let mut sum = 0.0;
    for j in 0..=top {
        let h = k / 2.0 + j as f64;
        let ln_chi = (h - 1.0) * y.ln() - y / 2.0 - h * 2f64.ln() - ln_gamma(h);
        sum += (ln_pois(mu, j) + ln_chi).exp();
    }
    sum / scale
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn criterion_1(samples: &Samples) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut total_s = 0.0;
    for &(dt, ref xs, sim_s) in &samples.by_dt {
        let t0 = Instant::now();
        let m = baseline(dt);
        let ev = m.evaluator(&policy()).unwrap();
        let dc = density_comparison(&ev, xs, N_BINS).unwrap();
        let floor = expected_ise(&ev, &dc, xs.len()).unwrap();
        total_s += sim_s + t0.elapsed().as_secs_f64();
        pass &= dc.ise < ISE_MAX;
        parts.push(format!("dt={dt}: ise={:.3e} (expected from sampling noise {:.3e})", dc.ise, floor));
    }
    pass &= total_s < ISE_RUNTIME_S;
    verdict(pass, format!("{} [< {ISE_MAX:e}]; runtime {total_s:.1}s [< {ISE_RUNTIME_S}s]", parts.join("; ")))
}

fn criterion_2(samples: &Samples) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for dt in [0.25, 0.05] {
        let m = baseline(dt);
        let ev = m.evaluator(&policy()).unwrap();
        let xs = samples.get(dt);
        let c = cdf_comparison(&ev, xs).unwrap();
        let band = KS_CRITICAL / (xs.len() as f64).sqrt() + c.max_trunc_bound;
        pass &= c.ks_sup <= band;
        parts.push(format!("dt={dt}: sup={:.3e} band={:.3e} interp_err={:.1e}", c.ks_sup, band, c.interp_error));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_3() -> Verdict {
    let t0 = Instant::now();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for dt in [1.0, 0.05] {
        let m = baseline(dt);
        for u in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let closed = m.laplace_closed(u).unwrap();
            let series = m.laplace_series(u, &policy()).unwrap();
            let diff = (series.value - closed).abs();
            pass &= diff <= series.trunc_error_bound + LAPLACE_REL * closed.abs();
            worst = worst.max(diff / closed.abs());
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < LAPLACE_RUNTIME_S;
    verdict(pass, format!("worst relative gap {worst:.2e} [<= bound + {LAPLACE_REL:e}]; runtime {secs:.2}s [< {LAPLACE_RUNTIME_S}s]"))
}

fn interior_grid(m: &SumModel) -> Vec<f64> {
    let (mean, var) = m.moments();
    let sd = var.sqrt();
    [-1.5, -0.75, 0.0, 0.75, 1.5, 3.0].iter().map(|z| (mean + z * sd).max(0.05 * mean)).collect()
}

fn criterion_4() -> Verdict {
    let t0 = Instant::now();
    let base = baseline(1.0);
    let near = {
        let (b1, b2) = (base.derived1().beta, base.derived2().beta);
        let f2 = CirFactor { weight: b1 / b2 * (1.0 + 1e-6), ..*base.factor2() };
        SumModel::new(*base.factor1(), f2, 1.0).unwrap()
    };
    let boundary = SumModel::new(
        CirFactor::new(0.5, 0.25, 0.5, 0.2, 1.0).unwrap(),
        CirFactor::new(1.8, 0.009, 0.15, 0.03, 1.0).unwrap(),
        0.5,
    )
    .unwrap();
    let regimes = [("baseline dt=0.25", baseline(0.25)), ("baseline dt=1", base.clone()), ("near-equal scales", near), ("Feller boundary", boundary)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, m) in &regimes {
        let ev = m.evaluator(&policy()).unwrap();
        let r = oracle_crosscheck(&ev, &interior_grid(m)).unwrap();
        pass &= r.pdf_max_abs_err <= ORACLE_ABS;
        parts.push(format!("{name}: {:.2e}", r.pdf_max_abs_err));
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < ORACLE_RUNTIME_S;
    verdict(pass, format!("{} [<= {ORACLE_ABS:e}]; runtime {secs:.1}s [< {ORACLE_RUNTIME_S}s]", parts.join(", ")))
}

fn criterion_5() -> Verdict {
    let base = baseline(0.25);
    let (b1, b2) = (base.derived1().beta, base.derived2().beta);
    let f2 = CirFactor { weight: b1 / b2, ..*base.factor2() };
    let m = SumModel::new(*base.factor1(), f2, 0.25).unwrap();
    let (p1, p2) = (m.derived1(), m.derived2());
    // No truncation level is prescribed here; 1e-14 keeps the dropped tail of
    // the merged Poisson sum far below the 1e-10 relative target. The default
    // level is reported alongside, checked against its own certified bound.
    let ev = m.evaluator(&TruncationPolicy::tail(1e-14)).unwrap();
    let coarse = m.evaluator(&policy()).unwrap();
    let merged = ev.plan().merged.is_some();
    let (mean, var) = m.moments();
    let mut worst: f64 = 0.0;
    let mut worst_coarse: f64 = 0.0;
    let mut coarse_certified = true;
    for i in 0..10 {
        let s = (mean + (i as f64 - 3.0) * 0.6 * var.sqrt()).max(0.1 * mean);
        let want = ncx2_pdf(s, p1.d + p2.d, p1.lambda + p2.lambda, p1.beta / 2.0);
        let got = ev.pdf(s).unwrap().value;
        worst = worst.max(((got - want) / want).abs());
        let c = coarse.pdf(s).unwrap();
        worst_coarse = worst_coarse.max(((c.value - want) / want).abs());
        coarse_certified &= (c.value - want).abs() <= c.trunc_error_bound + 1e-12 * want;
    }
    verdict(
        merged && worst <= COLLAPSE_REL && coarse_certified,
        format!(
            "merged path {merged}; worst relative error {worst:.2e} at eps=1e-14 [<= {COLLAPSE_REL:e}]; \
             {worst_coarse:.2e} at eps=1e-10, within certified bound: {coarse_certified}"
        ),
    )
}

fn criterion_6(samples: &Samples) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for dt in DTS {
        let m = baseline(dt);
        let ev = m.evaluator(&policy()).unwrap();
        let (mean, var) = m.moments();
        let hi = mean + 40.0 * var.sqrt();
        let pdf = |s: f64| if s > 0.0 { ev.pdf(s).unwrap().value } else { 0.0 };
        let q_mean = integrate(&|s| s * pdf(s), 0.0, hi, 64, 1e-14);
        let q_var = integrate(&|s| (s - mean).powi(2) * pdf(s), 0.0, hi, 64, 1e-16);
        let rel_m = ((q_mean - mean) / mean).abs();
        let rel_v = ((q_var - var) / var).abs();

        let xs = samples.get(dt);
        let n = xs.len() as f64;
        let sm = xs.iter().sum::<f64>() / n;
        let sv = xs.iter().map(|x| (x - sm).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = xs.iter().map(|x| (x - sm).powi(4)).sum::<f64>() / n;
        let z_m = (sm - mean) / (var / n).sqrt();
        let z_v = (sv - var) / ((m4 - sv * sv) / n).sqrt();
        pass &= rel_m <= MOMENT_QUAD_REL && rel_v <= MOMENT_QUAD_REL && z_m.abs() <= MOMENT_SE && z_v.abs() <= MOMENT_SE;
        parts.push(format!("dt={dt}: quad rel {rel_m:.1e}/{rel_v:.1e}, MC {z_m:+.2}/{z_v:+.2} SE"));
    }
    verdict(pass, format!("{} [quad <= {MOMENT_QUAD_REL:e}, MC <= {MOMENT_SE} SE]", parts.join("; ")))
}

fn criterion_7() -> Verdict {
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    let mut cases = 0;
    for dt in DTS {
        let m = baseline(dt);
        let mu1 = m.derived1().lambda / 2.0;
        let mu2 = m.derived2().lambda / 2.0;
        for eps in [1e-4, 1e-8, 1e-12] {
            for method in [TruncationMethod::TailQuantile, TruncationMethod::WeightWindow, TruncationMethod::NormalApprox] {
                let plan = m.plan(&TruncationPolicy { method, eps, factor1_share: 0.5 }).unwrap();
                let (c1, c2) = (plan.factor1.unwrap(), plan.factor2.unwrap());
                let d1 = dropped_exact(mu1, c1.lo, c1.hi);
                let d2 = dropped_exact(mu2, c2.lo, c2.hi);
                let total = d1 + d2 - d1 * d2;
                pass &= total <= eps;
                worst_ratio = worst_ratio.max(total / eps);
                cases += 1;
            }
        }
    }
    verdict(pass, format!("{cases} cases; largest dropped/eps = {worst_ratio:.3} [<= 1]"))
}

fn criterion_8() -> Verdict {
    let mut sups = Vec::new();
    for dt in [1.0, 0.25, 0.05, 0.01] {
        let m = baseline(dt);
        let ev = m.evaluator(&policy()).unwrap();
        let (mean, var) = m.moments();
        let sd = var.sqrt();
        let mut sup: f64 = 0.0;
        for i in 0..41 {
            let z = -4.0 + 0.2 * i as f64;
            let s = mean + z * sd;
            let f = if s <= 0.0 { 0.0 } else { ev.cdf(s).unwrap().value };
            sup = sup.max((f - normal_cdf(z)).abs());
        }
        sups.push(sup);
    }
    let pass = sups.windows(2).all(|w| w[1] < w[0]);
    let text: Vec<String> = sups.iter().map(|s| format!("{s:.4e}")).collect();
    verdict(pass, format!("sup distance along dt=1,0.25,0.05,0.01: {} [strictly decreasing]", text.join(" > ")))
}

fn criterion_9() -> Verdict {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol;

    // log-gamma
    check("lgamma(1)", log_gamma(1.0).unwrap() == 0.0);
    check("lgamma(0.5)", close(log_gamma(0.5).unwrap(), 0.5723649429247001, 1e-15));
    check("lgamma(10)", close(log_gamma(10.0).unwrap(), 362880f64.ln(), 1e-13 * 362880f64.ln()));
    for i in 0..=240 {
        let a = 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0);
        let v = log_gamma(a).unwrap();
        check(&format!("lgamma grid a={a:e}"), close(v, ln_gamma(a), 1e-13 * v.abs().max(1.0)));
        let rec = log_gamma(a + 1.0).unwrap() - a.ln() - v;
        check(&format!("lgamma recurrence a={a:e}"), rec.abs() <= 1e-12 * v.abs().max(1.0));
    }
    check("lgamma(0) rejected", log_gamma(0.0).is_err());

    // regularized lower incomplete gamma
    check("P(a,0)", reg_lower_gamma(2.5, 0.0).unwrap() == 0.0);
    for x in [1e-3, 0.5, 1.0, 5.0, 30.0] {
        check("P(1,x)", close(reg_lower_gamma(1.0, x).unwrap(), -(-x).exp_m1(), 1e-13));
    }
    // erf(sqrt(1/2)) to 40 digits; statrs erf is only good to ~3e-11 here.
    check("P(0.5,0.5)", close(reg_lower_gamma(0.5, 0.5).unwrap(), 0.6826894921370858971704650912640758449558, 1e-15));
    for &a in &[0.1, 0.6, 1.0, 2.35, 7.5, 17.5, 60.0, 250.0] {
        let mut prev = 0.0;
        for j in 0..=60 {
            let x = a * 4.0 * (j + 1) as f64 / 61.0;
            let p = reg_lower_gamma(a, x).unwrap();
            check(&format!("P({a},{x}) vs reference"), close(p, gamma_lr(a, x), 1e-13));
            check("P monotone", p >= prev);
            prev = p;
        }
    }

    // Kummer 1F1
    check("1F1(a,b,0)", kummer_1f1(2.3, 4.1, 0.0).unwrap().to_f64() == 1.0);
    for z in [-700.0, -35.0, -1.0, -1e-3, 1e-3, 2.0, 50.0, 700.0] {
        check(&format!("1F1(a,a,{z})"), close(kummer_1f1(3.7, 3.7, z).unwrap().ln(), z, 1e-12 * z.abs().max(1.0)));
        let want = if z > 0.0 { z.exp_m1().ln() - z.ln() } else { (-z.exp_m1()).ln() - (-z).ln() };
        check(&format!("1F1(1,2,{z})"), close(kummer_1f1(1.0, 2.0, z).unwrap().ln(), want, 1e-12));
    }

    // Pochhammer
    check("(v)_0", log_pochhammer(3.3, 0).unwrap() == 0.0);
    for k in [1u64, 5, 20, 170] {
        check(&format!("(1)_{k}"), close(log_pochhammer(1.0, k).unwrap(), ln_gamma(k as f64 + 1.0), 1e-12 * ln_gamma(k as f64 + 1.0).max(1.0)));
    }
    check("(2.5)_3", close(log_pochhammer(2.5, 3).unwrap(), (2.5f64 * 3.5 * 4.5).ln(), 1e-14));

    // Poisson weights and quantiles
    let w = poisson_weights(0.0, 3).unwrap();
    check("weights mean 0", w == vec![1.0, 0.0, 0.0, 0.0]);
    check("weight(1; 0)", close(poisson_weights(1.0, 0).unwrap()[0], (-1f64).exp(), 1e-16));
    check("weight(0.076; 1)", close(poisson_weights(0.076, 1).unwrap()[1], 0.076 * (-0.076f64).exp(), 1e-16));
    check("quantile(0)", poisson_tail_quantile(0.0, 1e-8).unwrap() == 0);
    check("quantile(1, 0.5)", poisson_tail_quantile(1.0, 0.5).unwrap() == 1);
    let q = poisson_tail_quantile(100.0, 1e-8).unwrap();
    check("quantile(100, 1e-8) minimal", dropped_exact(100.0, 0, q) <= 1e-8 && dropped_exact(100.0, 0, q - 1) > 1e-8);

    // normal quantile
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    check("Phi^-1(0.5)", normal_quantile(0.5).unwrap().abs() <= 1e-15);
    check("Phi^-1(0.975)", close(normal_quantile(0.975).unwrap(), 1.959963984540054, 1e-9));
    for i in 1..200 {
        let p = i as f64 / 200.0;
        let (a, b) = (normal_quantile(p).unwrap(), normal_quantile(1.0 - p).unwrap());
        check("Phi^-1 symmetry", close(a, -b, 1e-9));
        check("Phi^-1 reference", close(a, std_normal.inverse_cdf(p), 1e-9));
    }
    check("Phi^-1 rejects 0", normal_quantile(0.0).is_err() && normal_quantile(1.0).is_err());

    // kernel closed forms
    let k = KernelParams::new(1.0, 1.0, 1.0, 2.0).unwrap();
    check("kernel pdf (1,1,1,2) at 1", close(kernel_pdf(&k, 1.0).unwrap(), (-0.5f64).exp() - (-1f64).exp(), 1e-10));
    let k = KernelParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
    let want = 1.0 - 2.0 * (-1f64).exp() + (-2f64).exp();
    check("kernel cdf (1,1,2,1) at 2", close(kernel_cdf(&k, 2.0, 1e-14).unwrap().value, want, 1e-9));

    // CDF series against quadrature of the density
    let mut worst: f64 = 0.0;
    for dt in DTS {
        let m = baseline(dt);
        let ev = m.evaluator(&policy()).unwrap();
        let (mean, var) = m.moments();
        let sd = var.sqrt();
        let pdf = |s: f64| if s > 0.0 { ev.pdf(s).unwrap().value } else { 0.0 };
        let grid: Vec<f64> = (1..=10).map(|i| (mean - 2.0 * sd).max(0.0) + (8.0 * sd) * i as f64 / 10.0).collect();
        let mut acc = integrate(&pdf, 0.0, (mean - 2.0 * sd).max(0.0), 16, 1e-13);
        let mut left = (mean - 2.0 * sd).max(0.0);
        for &s in &grid {
            acc += integrate(&pdf, left, s, 4, 1e-13);
            left = s;
            let err = (ev.cdf(s).unwrap().value - acc).abs();
            worst = worst.max(err);
        }
    }
    check("cdf series vs quadrature", worst <= CDF_SERIES_ABS);

    let pass = failures.is_empty();
    let detail = if pass {
        format!("all golden checks hold; cdf series vs quadrature worst {worst:.2e} [<= {CDF_SERIES_ABS:e}]")
    } else {
        format!("{} failed: {}", failures.len(), failures.iter().take(6).cloned().collect::<Vec<_>>().join(", "))
    };
    verdict(pass, detail)
}

fn criterion_10() -> Verdict {
    let t0 = Instant::now();
    let m = baseline(1.0);
    let bounds = [(0.5, 3.0), (0.0515, 0.12), (0.2, 0.3515), (0.5, 4.0), (0.005, 0.05), (0.05, 0.3)];
    let mut kappa_hits = 0;
    let mut pair_hits = 0;
    let mut parts = Vec::new();
    for seed in 1..=3u64 {
        let xs = simulate_sum(&m, 10_000, seed);
        let spec = FitSpec::new(xs.clone(), m.clone(), [true, false, false, false, false, false], bounds).unwrap();
        let r = fit_mle(&spec, &policy(), 500).unwrap();
        let k = r.point[0];
        kappa_hits += usize::from((k - 1.2).abs() <= KAPPA_TOL);
        let spec = FitSpec::new(xs, m.clone(), [false, true, true, false, false, false], bounds).unwrap();
        let r = fit_mle(&spec, &policy(), 500).unwrap();
        let (th, sg) = (r.point[1], r.point[2]);
        pair_hits += usize::from(((th - 0.06) / 0.06).abs() <= THETA_SIGMA_REL && ((sg - 0.35) / 0.35).abs() <= THETA_SIGMA_REL);
        parts.push(format!("seed {seed}: kappa1={k:.4} theta1={th:.5} sigma1={sg:.4}"));
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = kappa_hits == 3 && pair_hits >= 2 && secs < MLE_RUNTIME_S;
    verdict(
        pass,
        format!(
            "{}; kappa1 within {KAPPA_TOL} in {kappa_hits}/3 [3/3], (theta1, sigma1) within {:.0}% in {pair_hits}/3 [>= 2/3]; runtime {secs:.0}s [< {MLE_RUNTIME_S}s]",
            parts.join("; "),
            THETA_SIGMA_REL * 100.0
        ),
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    // `cargo test -- --list` and similar harness probes: nothing to list.
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let t0 = Instant::now();
    let samples = Samples {
        by_dt: DTS
            .iter()
            .map(|&dt| {
                let t = Instant::now();
                let xs = simulate_sum(&baseline(dt), N_MC, SEED);
                (dt, xs, t.elapsed().as_secs_f64())
            })
            .collect(),
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("ISE reproduction", Box::new(|| criterion_1(&samples))),
        ("CDF tracking", Box::new(|| criterion_2(&samples))),
        ("Laplace identity", Box::new(criterion_3)),
        ("oracle equivalence", Box::new(criterion_4)),
        ("equal-scale collapse", Box::new(criterion_5)),
        ("moments", Box::new(|| criterion_6(&samples))),
        ("truncation certification", Box::new(criterion_7)),
        ("Gaussian limit", Box::new(criterion_8)),
        ("special-function golden suite", Box::new(criterion_9)),
        ("MLE recovery", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!v.pass);
        println!("{} {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed, {:.0}s", criteria.len() - failed, t0.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
