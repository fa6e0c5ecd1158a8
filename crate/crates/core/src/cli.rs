//! Configuration and subcommands behind the `cirsum` binary.
//!
//! A run is configured by a flat `key = value` file (`#` starts a comment)
//! overlaid with command-line flags. Every output starts with `#` lines
//! echoing the fully resolved configuration, so a file can be reproduced from
//! its own header.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cir::CirFactor;
use crate::error::{Error, Result};
use crate::estimate::{fit_mle, parse_observations, FitSpec, DIAGNOSTICS_HEADER, PARAM_NAMES};
use crate::mixture::SumModel;
use crate::truncation::{TruncationMethod, TruncationPolicy};
use crate::validate::{format_number, run_validation, simulate_sum, CSV_HEADER};

/// Every configuration key: name, unit, meaning, default.
pub const KEYS: &[(&str, &str, &str, &str)] = &[
    ("f1.kappa", "1/time", "mean-reversion speed of factor 1", "1.2"),
    ("f1.theta", "state", "long-run level of factor 1", "0.06"),
    ("f1.sigma", "state^1/2 per time^1/2", "volatility of factor 1", "0.35"),
    ("f1.x0", "state", "starting value of factor 1", "0.009"),
    ("f1.a", "dimensionless", "weight of factor 1 in the sum", "1"),
    ("f2.kappa", "1/time", "mean-reversion speed of factor 2", "1.8"),
    ("f2.theta", "state", "long-run level of factor 2", "0.009"),
    ("f2.sigma", "state^1/2 per time^1/2", "volatility of factor 2", "0.15"),
    ("f2.x0", "state", "starting value of factor 2", "0.03"),
    ("f2.a", "dimensionless", "weight of factor 2 in the sum", "1"),
    ("dt", "time", "transition step", "1"),
    ("trunc", "tail|normal|window", "Poisson truncation method", "tail"),
    ("eps", "probability", "total Poisson mass allowed to be dropped", "1e-10"),
    ("factor1_share", "fraction", "share of eps given to factor 1", "0.5"),
    ("grid", "state", "evaluation grid, MIN:MAX:COUNT or auto:COUNT (auto spans [0, mean+10 sd])", "auto:200"),
    ("seed", "integer", "random seed", "1"),
    ("n_samples", "count", "Monte Carlo draws", "1000000"),
    ("n_bins", "count", "histogram bins for validate", "200"),
    ("timing", "true|false", "report per-phase wall-clock times (breaks byte-identical output)", "false"),
    ("out", "path", "output file; empty for standard output", ""),
    ("data", "path", "observations for fit, one-column CSV with header s", ""),
    ("free", "names", "comma-separated fitted parameters among kappa1,theta1,sigma1,kappa2,theta2,sigma2", ""),
    ("budget", "evaluations", "likelihood evaluations allowed to fit", "500"),
    ("bounds.kappa1", "1/time", "search interval LO:HI", "0.5:3"),
    ("bounds.theta1", "state", "search interval LO:HI", "0.0515:0.12"),
    ("bounds.sigma1", "state^1/2 per time^1/2", "search interval LO:HI", "0.2:0.3515"),
    ("bounds.kappa2", "1/time", "search interval LO:HI", "0.5:4"),
    ("bounds.theta2", "state", "search interval LO:HI", "0.005:0.05"),
    ("bounds.sigma2", "state^1/2 per time^1/2", "search interval LO:HI", "0.05:0.3"),
];

/// Keys that may be overridden for the analytic side of `validate`.
const MODEL_KEYS: &[&str] =
    &["f1.kappa", "f1.theta", "f1.sigma", "f1.x0", "f1.a", "f2.kappa", "f2.theta", "f2.sigma", "f2.x0", "f2.a", "dt"];

fn keys_help() -> String {
    let mut s = String::from("Configuration keys (file `key = value`, or the flag of the same name):\n");
    for (k, unit, what, default) in KEYS {
        let _ = writeln!(s, "  {k:<14} [{unit}] {what} (default {})", if default.is_empty() { "none" } else { default });
    }
    s.push_str("  analytic.KEY   override KEY for the analytic model only (validate), e.g. analytic.f1.sigma\n");
    s.push_str("\nExit codes: 0 success, 1 validation failure, 2 configuration error, 3 numerical failure.");
    s
}

#[derive(Debug, Parser)]
#[command(name = "cirsum", version, about = "Exact transition law of a weighted sum of two CIR factors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the density: columns s, value, trunc_error_bound.
    #[command(after_help = keys_help())]
    Pdf(CommonArgs),
    /// Tabulate the CDF: columns s, value, trunc_error_bound.
    #[command(after_help = keys_help())]
    Cdf(CommonArgs),
    /// Print mean and variance as key=value lines.
    #[command(after_help = keys_help())]
    Moments(CommonArgs),
    /// Draw n_samples exact samples of the sum (column s).
    #[command(after_help = keys_help())]
    Simulate(CommonArgs),
    /// Monte Carlo and quadrature validation with PASS/FAIL per criterion.
    #[command(after_help = keys_help())]
    Validate(CommonArgs),
    /// Maximum-likelihood fit of the free parameters to observed sums.
    #[command(after_help = keys_help())]
    Fit(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file [path].
    #[arg(long, value_name = "PATH")]
    pub out: Option<String>,
    /// Random seed [integer].
    #[arg(long)]
    pub seed: Option<String>,
    /// Dropped Poisson mass allowed [probability].
    #[arg(long)]
    pub eps: Option<String>,
    /// Truncation method [tail|normal|window].
    #[arg(long)]
    pub trunc: Option<String>,
    /// Transition step [time].
    #[arg(long)]
    pub dt: Option<String>,
    /// Grid, MIN:MAX:COUNT or auto:COUNT [state].
    #[arg(long)]
    pub grid: Option<String>,
    /// Monte Carlo draws [count].
    #[arg(long = "n-samples")]
    pub n_samples: Option<String>,
    /// Histogram bins [count].
    #[arg(long = "n-bins")]
    pub n_bins: Option<String>,
    /// Report per-phase wall-clock times.
    #[arg(long)]
    pub timing: bool,
    /// Observations file for fit [path].
    #[arg(long, value_name = "PATH")]
    pub data: Option<String>,
    /// Fitted parameters, comma-separated [names].
    #[arg(long)]
    pub free: Option<String>,
    /// Search interval NAME=LO:HI, repeatable.
    #[arg(long, value_name = "NAME=LO:HI")]
    pub bounds: Vec<String>,
    /// Likelihood evaluation budget [evaluations].
    #[arg(long)]
    pub budget: Option<String>,
    /// Override KEY for the analytic model only, repeatable.
    #[arg(long, value_name = "KEY=VALUE")]
    pub analytic: Vec<String>,
    /// Mean-reversion speed of factor 1 [1/time].
    #[arg(long = "f1.kappa")]
    pub f1_kappa: Option<String>,
    /// Long-run level of factor 1 [state].
    #[arg(long = "f1.theta")]
    pub f1_theta: Option<String>,
    /// Volatility of factor 1 [state^1/2 per time^1/2].
    #[arg(long = "f1.sigma")]
    pub f1_sigma: Option<String>,
    /// Starting value of factor 1 [state].
    #[arg(long = "f1.x0")]
    pub f1_x0: Option<String>,
    /// Weight of factor 1 [dimensionless].
    #[arg(long = "f1.a")]
    pub f1_a: Option<String>,
    /// Mean-reversion speed of factor 2 [1/time].
    #[arg(long = "f2.kappa")]
    pub f2_kappa: Option<String>,
    /// Long-run level of factor 2 [state].
    #[arg(long = "f2.theta")]
    pub f2_theta: Option<String>,
    /// Volatility of factor 2 [state^1/2 per time^1/2].
    #[arg(long = "f2.sigma")]
    pub f2_sigma: Option<String>,
    /// Starting value of factor 2 [state].
    #[arg(long = "f2.x0")]
    pub f2_x0: Option<String>,
    /// Weight of factor 2 [dimensionless].
    #[arg(long = "f2.a")]
    pub f2_a: Option<String>,
}

impl CommonArgs {
    /// Flag values as `(key, value)` pairs, in key order.
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut v: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, x: &Option<String>| {
            if let Some(x) = x {
                v.push((k.to_string(), x.clone()));
            }
        };
        put("f1.kappa", &self.f1_kappa);
        put("f1.theta", &self.f1_theta);
        put("f1.sigma", &self.f1_sigma);
        put("f1.x0", &self.f1_x0);
        put("f1.a", &self.f1_a);
        put("f2.kappa", &self.f2_kappa);
        put("f2.theta", &self.f2_theta);
        put("f2.sigma", &self.f2_sigma);
        put("f2.x0", &self.f2_x0);
        put("f2.a", &self.f2_a);
        put("dt", &self.dt);
        put("trunc", &self.trunc);
        put("eps", &self.eps);
        put("grid", &self.grid);
        put("seed", &self.seed);
        put("n_samples", &self.n_samples);
        put("n_bins", &self.n_bins);
        put("out", &self.out);
        put("data", &self.data);
        put("free", &self.free);
        put("budget", &self.budget);
        if self.timing {
            v.push(("timing".into(), "true".into()));
        }
        for b in &self.bounds {
            let (name, range) = b
                .split_once('=')
                .ok_or_else(|| Error::config("bounds", format!("expected NAME=LO:HI, got `{b}`")))?;
            v.push((format!("bounds.{}", name.trim()), range.trim().to_string()));
        }
        for a in &self.analytic {
            let (k, x) = a
                .split_once('=')
                .ok_or_else(|| Error::config("analytic", format!("expected KEY=VALUE, got `{a}`")))?;
            v.push((format!("analytic.{}", k.trim()), x.trim().to_string()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Auto { count: usize },
    Range { min: f64, max: f64, count: usize },
}

impl Grid {
    pub fn parse(s: &str) -> Result<Grid> {
        let bad = || Error::config("grid", format!("expected MIN:MAX:COUNT or auto:COUNT, got `{s}`"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let count = |c: &str| -> Result<usize> {
            let n: usize = c.parse().map_err(|_| bad())?;
            if n < 2 {
                return Err(Error::config("grid", "COUNT must be at least 2"));
            }
            Ok(n)
        };
        match parts.as_slice() {
            ["auto"] => Ok(Grid::Auto { count: 200 }),
            ["auto", c] => Ok(Grid::Auto { count: count(c)? }),
            [lo, hi, c] => {
                let min: f64 = lo.parse().map_err(|_| bad())?;
                let max: f64 = hi.parse().map_err(|_| bad())?;
                if !(min >= 0.0 && max > min && max.is_finite()) {
                    return Err(Error::config("grid", format!("need 0 <= MIN < MAX, got {min}:{max}")));
                }
                Ok(Grid::Range { min, max, count: count(c)? })
            }
            _ => Err(bad()),
        }
    }

    /// Equally spaced points, endpoints included.
    pub fn points(&self, m: &SumModel) -> Vec<f64> {
        let (min, max, count) = match *self {
            Grid::Auto { count } => {
                let (mean, var) = m.moments();
                (0.0, mean + 10.0 * var.sqrt(), count)
            }
            Grid::Range { min, max, count } => (min, max, count),
        };
        (0..count).map(|i| min + (max - min) * i as f64 / (count - 1) as f64).collect()
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Every key with its resolved value, in [`KEYS`] order, then overrides.
    pub entries: Vec<(String, String)>,
    pub model: SumModel,
    /// Analytic model for `validate` when `analytic.*` keys are present.
    pub analytic: Option<SumModel>,
    pub policy: TruncationPolicy,
    pub grid: Grid,
    pub seed: u64,
    pub n_samples: usize,
    pub n_bins: usize,
    pub timing: bool,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub free: [bool; 6],
    pub bounds: [(f64, f64); 6],
    pub budget: usize,
}

/// `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", i + 1), format!("expected key = value, got `{line}`")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn is_known(key: &str) -> bool {
    KEYS.iter().any(|(k, ..)| *k == key)
        || key.strip_prefix("analytic.").is_some_and(|k| MODEL_KEYS.contains(&k))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::config(key, format!("cannot parse `{v}`")))
}

fn build_model(get: &dyn Fn(&str) -> String) -> Result<SumModel> {
    let f = |k: &str| -> Result<f64> { num(k, &get(k)) };
    let factor = |p: &str| -> Result<CirFactor> {
        let c = CirFactor {
            kappa: f(&format!("{p}.kappa"))?,
            theta: f(&format!("{p}.theta"))?,
            sigma: f(&format!("{p}.sigma"))?,
            x0: f(&format!("{p}.x0"))?,
            weight: f(&format!("{p}.a"))?,
        };
        c.validate().map_err(|e| Error::config(p, e.to_string()))?;
        Ok(c)
    };
    let dt = f("dt")?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("dt", format!("must be positive, got {dt}")));
    }
    SumModel::new(factor("f1")?, factor("f2")?, dt).map_err(|e| Error::config("dt", e.to_string()))
}

impl RunConfig {
    /// Defaults, then `file` entries, then `flags`; later entries win.
    pub fn resolve(file: &[(String, String)], flags: &[(String, String)]) -> Result<RunConfig> {
        let mut map: Vec<(String, String)> = KEYS.iter().map(|(k, .., d)| (k.to_string(), d.to_string())).collect();
        for (k, v) in file.iter().chain(flags) {
            if !is_known(k) {
                return Err(Error::config(k.clone(), "unknown key"));
            }
            match map.iter_mut().find(|(mk, _)| mk == k) {
                Some(slot) => slot.1 = v.clone(),
                None => map.push((k.clone(), v.clone())),
            }
        }
        let get = |k: &str| map.iter().find(|(mk, _)| mk == k).map(|e| e.1.clone()).unwrap_or_default();

        let model = build_model(&get)?;
        let analytic = if map.iter().any(|(k, _)| k.starts_with("analytic.")) {
            let aget = |k: &str| {
                let ak = format!("analytic.{k}");
                map.iter().find(|(mk, _)| *mk == ak).map(|e| e.1.clone()).unwrap_or_else(|| get(k))
            };
            Some(build_model(&aget).map_err(|e| match e {
                Error::Config { key, detail } => Error::config(format!("analytic.{key}"), detail),
                e => e,
            })?)
        } else {
            None
        };

        let method = TruncationMethod::parse(&get("trunc"))
            .ok_or_else(|| Error::config("trunc", format!("expected tail, normal or window, got `{}`", get("trunc"))))?;
        let policy = TruncationPolicy { method, eps: num("eps", &get("eps"))?, factor1_share: num("factor1_share", &get("factor1_share"))? };
        policy.validate().map_err(|e| Error::config("eps", e.to_string()))?;

        let n_samples: usize = num("n_samples", &get("n_samples"))?;
        if n_samples == 0 {
            return Err(Error::config("n_samples", "must be at least 1"));
        }
        let n_bins: usize = num("n_bins", &get("n_bins"))?;
        let timing = match get("timing").as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            v => return Err(Error::config("timing", format!("expected true or false, got `{v}`"))),
        };
        let path = |k: &str| {
            let v = get(k);
            (!v.is_empty()).then(|| PathBuf::from(v))
        };

        let mut free = [false; 6];
        for name in get("free").split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let i = PARAM_NAMES
                .iter()
                .position(|&n| n == name)
                .ok_or_else(|| Error::config("free", format!("unknown parameter `{name}`")))?;
            free[i] = true;
        }
        let mut bounds = [(0.0, 0.0); 6];
        for (i, name) in PARAM_NAMES.iter().enumerate() {
            let key = format!("bounds.{name}");
            let v = get(&key);
            let (lo, hi) = v.split_once(':').ok_or_else(|| Error::config(key.clone(), format!("expected LO:HI, got `{v}`")))?;
            bounds[i] = (num(&key, lo.trim())?, num(&key, hi.trim())?);
        }

        Ok(RunConfig {
            model,
            analytic,
            policy,
            grid: Grid::parse(&get("grid"))?,
            seed: num("seed", &get("seed"))?,
            n_samples,
            n_bins,
            timing,
            out: path("out"),
            data: path("data"),
            free,
            bounds,
            budget: num("budget", &get("budget"))?,
            entries: map,
        })
    }

    /// `# cirsum <command>` followed by one `# key = value` line per entry.
    /// The output path is left out so that a file does not describe itself.
    pub fn header(&self, command: &str) -> String {
        let mut s = format!("# cirsum {command}\n");
        for (k, v) in self.entries.iter().filter(|(k, _)| k != "out") {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}

fn table(cfg: &RunConfig, command: &str, cdf: bool) -> Result<String> {
    let ev = cfg.model.evaluator(&cfg.policy)?;
    let grid = cfg.grid.points(&cfg.model);
    let mut out = cfg.header(command);
    out.push_str("s,value,trunc_error_bound\n");
    // The total shape is at least 2 under Feller, so the density vanishes at 0.
    let interior: Vec<f64> = grid.iter().copied().filter(|&s| s > 0.0).collect();
    let vals = if cdf { ev.cdf_many(&interior)? } else { ev.pdf_many(&interior)? };
    let mut it = vals.iter();
    for &s in &grid {
        if s > 0.0 {
            let r = it.next().expect("one value per interior point");
            let _ = writeln!(out, "{},{},{}", format_number(s), format_number(r.value), format_number(r.trunc_error_bound));
        } else {
            let _ = writeln!(out, "{},0,0", format_number(s));
        }
    }
    Ok(out)
}

pub fn cmd_pdf(cfg: &RunConfig) -> Result<String> {
    table(cfg, "pdf", false)
}

pub fn cmd_cdf(cfg: &RunConfig) -> Result<String> {
    table(cfg, "cdf", true)
}

pub fn cmd_moments(cfg: &RunConfig) -> Result<String> {
    let (mean, var) = cfg.model.moments();
    Ok(format!("{}mean={}\nvariance={}\n", cfg.header("moments"), format_number(mean), format_number(var)))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<String> {
    let xs = simulate_sum(&cfg.model, cfg.n_samples, cfg.seed);
    let mut out = cfg.header("simulate");
    out.reserve(xs.len() * 24);
    out.push_str("s\n");
    for x in xs {
        out.push_str(&format_number(x));
        out.push('\n');
    }
    Ok(out)
}

/// Report CSV, then the criterion lines; the flag is true when all pass.
pub fn cmd_validate(cfg: &RunConfig) -> Result<(String, String, bool)> {
    let analytic = cfg.analytic.as_ref().unwrap_or(&cfg.model);
    let mut outcome = run_validation(analytic, &cfg.model, &cfg.policy, cfg.n_samples, cfg.n_bins, cfg.seed)?;
    if !cfg.timing {
        outcome.report.runtime_ms.clear();
    }
    let csv = format!("{}{CSV_HEADER}\n{}\n", cfg.header("validate"), outcome.report.to_csv_row());
    let mut lines = outcome.report.to_string();
    let _ = writeln!(lines, "cdf interpolation error={:e}", outcome.cdf.interp_error);
    for c in &outcome.criteria {
        let _ = writeln!(lines, "{c}");
    }
    let pass = outcome.passed();
    let _ = writeln!(lines, "{}", if pass { "PASS overall" } else { "FAIL overall" });
    Ok((csv, lines, pass))
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<String> {
    let path = cfg.data.as_ref().ok_or_else(|| Error::config("data", "fit needs an observations file"))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let obs = parse_observations(&text)?;
    let spec = FitSpec::new(obs, cfg.model.clone(), cfg.free, cfg.bounds).map_err(|e| match e {
        Error::Feller { .. } => Error::config("bounds", e.to_string()),
        e => e,
    })?;
    let r = fit_mle(&spec, &cfg.policy, cfg.budget).map_err(|e| match e {
        Error::Domain { op: "fit_mle", detail } => Error::config("budget", detail),
        e => e,
    })?;
    let mut out = cfg.header("fit");
    for a in spec.adjustments() {
        let _ = writeln!(out, "# adjusted {a}");
    }
    out.push_str(&r.key_values());
    let _ = writeln!(out, "{DIAGNOSTICS_HEADER}\n{}", r.diagnostics_row());
    Ok(out)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Domain { .. } | Error::Feller { .. } | Error::Io(_) => 2,
        _ => 3,
    }
}

fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32> {
    let (name, args) = match command {
        Command::Pdf(a) => ("pdf", a),
        Command::Cdf(a) => ("cdf", a),
        Command::Moments(a) => ("moments", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Validate(a) => ("validate", a),
        Command::Fit(a) => ("fit", a),
    };
    let file = match &args.config {
        Some(p) => parse_config_text(
            &std::fs::read_to_string(p).map_err(|e| Error::config("config", format!("{}: {e}", p.display())))?,
        )?,
        None => Vec::new(),
    };
    let cfg = RunConfig::resolve(&file, &args.overrides()?)?;
    let text = match name {
        "pdf" => cmd_pdf(&cfg)?,
        "cdf" => cmd_cdf(&cfg)?,
        "moments" => cmd_moments(&cfg)?,
        "simulate" => cmd_simulate(&cfg)?,
        "fit" => cmd_fit(&cfg)?,
        _ => {
            let (csv, lines, pass) = cmd_validate(&cfg)?;
            emit(&cfg, &csv, stdout)?;
            stdout.write_all(lines.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
            return Ok(if pass { 0 } else { 1 });
        }
    };
    emit(&cfg, &text, stdout)?;
    Ok(0)
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
