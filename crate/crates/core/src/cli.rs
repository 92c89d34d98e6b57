//! Command-line front end: argument parsing, dispatch and report output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use crate::contour::{self, QuadratureSettings};
use crate::density::{self, EigenvalueConfig, SpikeAlternative, TwoSampleDesign};
use crate::error::{Error, Result};
use crate::jack::{self, Spectrum};
use crate::params::{ParameterVectors, SpikeArgument};
use crate::result::{EvalResult, Method};
use crate::scalar::KernelCase;
use crate::sphere;

#[derive(Debug, Parser)]
#[command(name = "spiked-hyp", version, about = "Rank-one hypergeometric functions of two matrix arguments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Report `wall_ms` as 0 so that repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub no_wall_time: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate with the method chosen by --method (contour by default).
    Eval(FunctionArgs),
    /// Evaluate the Jack polynomial series.
    Oracle(FunctionArgs),
    /// Run every applicable method and report pairwise gaps.
    Compare(FunctionArgs),
    /// Joint eigenvalue density of the two-sample problem.
    Density(DensityArgs),
    /// Likelihood ratio against a rank-one alternative.
    Lr(DensityArgs),
    /// Likelihood ratio in the limit n2 → ∞; --f gives the limiting values μ.
    LrLimit(DensityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Auto,
    Contour,
    Series,
    Sphere,
}

fn parse_case(s: &str) -> std::result::Result<KernelCase, String> {
    KernelCase::parse(s).ok_or_else(|| format!("unknown case `{s}`; expected 0F0, 0F1, 1F0, 1F1 or 2F1"))
}

#[derive(Debug, Clone, Args)]
pub struct FunctionArgs {
    /// Function family; inferred from the lengths of --a and --b when absent.
    #[arg(long, value_parser = parse_case)]
    pub case: Option<KernelCase>,
    /// Numerator parameters, comma separated; complex values as `re+imi`.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub a: Vec<String>,
    /// Denominator parameters, comma separated; complex values as `re+imi`.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub b: Vec<String>,
    /// Jack parameter: 2 for real, 1 for complex matrices.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Matrix dimension; defaults to the length of the spectrum.
    #[arg(long)]
    pub r: Option<usize>,
    /// Nonzero eigenvalue of the rank-one argument.
    #[arg(long)]
    pub x: f64,
    /// Eigenvalues of the second argument, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "y_file")]
    pub y: Vec<f64>,
    /// File with one eigenvalue per line.
    #[arg(long)]
    pub y_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Maximum number of quadrature nodes.
    #[arg(long, default_value_t = 4_000_000)]
    pub nodes: usize,
    /// Monte Carlo sample count for the sphere average.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    pub method: MethodChoice,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n1: usize,
    /// Second sample size; unused by lr-limit.
    #[arg(long)]
    pub n2: Option<usize>,
    /// Spike size of the alternative; 0 is the null hypothesis.
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    /// Eigenvalues, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "f_file")]
    pub f: Vec<f64>,
    /// File with one eigenvalue per line.
    #[arg(long)]
    pub f_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

/// A finished computation, ready to serialize.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub params: Value,
    pub value: C64,
    pub err_estimate: f64,
    pub method: String,
    pub effort: usize,
    pub wall_ms: f64,
    /// Extra fields (per-method results and gaps for `compare`).
    pub extra: Map<String, Value>,
}

/// Parses `re`, `imi`, `re+imi` or `re-imi`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Domain(format!("cannot parse complex number `{text}`"));
    let number = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(number(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => number(t),
    };
    match split {
        Some(k) => Ok(C64::new(number(&body[..k])?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<f64>().map_err(|_| Error::Domain(format!("bad value `{l}` in {}", path.display()))))
        .collect()
}

fn values_or_file(inline: &[f64], file: &Option<PathBuf>, name: &str) -> Result<Vec<f64>> {
    match file {
        Some(path) => read_values(path),
        None if inline.is_empty() => Err(Error::Domain(format!("--{name} or --{name}-file is required"))),
        None => Ok(inline.to_vec()),
    }
}

/// Number with 17 significant digits, or null when not finite.
fn number(v: f64) -> Value {
    if v.is_finite() {
        serde_json::from_str(&format!("{v:.16e}")).unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}

fn numbers(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| number(v)).collect())
}

/// Validated inputs of a function evaluation.
struct Problem {
    params: ParameterVectors,
    alpha: f64,
    r: usize,
    x: f64,
    y: Spectrum,
    settings: QuadratureSettings,
    args: FunctionArgs,
}

impl Problem {
    fn new(args: &FunctionArgs) -> Result<Self> {
        let a = args.a.iter().map(|t| parse_complex(t)).collect::<Result<Vec<_>>>()?;
        let b = args.b.iter().map(|t| parse_complex(t)).collect::<Result<Vec<_>>>()?;
        if let Some(case) = args.case {
            let (p, q) = case.orders().unwrap_or((a.len(), b.len()));
            if (a.len(), b.len()) != (p, q) {
                return Err(Error::Domain(format!(
                    "case {} needs {p} numerator and {q} denominator parameters, got {} and {}",
                    case.name(),
                    a.len(),
                    b.len()
                )));
            }
        }
        let params = ParameterVectors::new(a, b)?;
        let y = Spectrum::new(values_or_file(&args.y, &args.y_file, "y")?)?;
        let r = args.r.unwrap_or(y.len());
        if y.len() != r {
            return Err(Error::Domain(format!("spectrum has {} entries but r = {r}", y.len())));
        }
        if !(args.x >= 0.0 && args.x.is_finite()) {
            return Err(Error::Domain(format!("x = {} must be nonnegative", args.x)));
        }
        if !(args.tol > 0.0 && args.tol < 1.0) {
            return Err(Error::Domain(format!("tol = {} must lie in (0, 1)", args.tol)));
        }
        if !(args.alpha > 0.0 && args.alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha = {} must be positive", args.alpha)));
        }
        let settings = QuadratureSettings { tol: args.tol, max_nodes: args.nodes, ..QuadratureSettings::default() };
        Ok(Self { params, alpha: args.alpha, r, x: args.x, y, settings, args: args.clone() })
    }

    fn spike(&self) -> Result<SpikeArgument> {
        SpikeArgument::new(self.x, self.r, self.alpha)
    }

    fn echo(&self, method: &str) -> Value {
        let list = |v: &[C64]| Value::Array(v.iter().map(|&z| Value::String(format_complex(z))).collect());
        let case = format!("{}F{}", self.params.p(), self.params.q());
        json!({
            "case": case,
            "a": list(&self.params.a),
            "b": list(&self.params.b),
            "alpha": number(self.alpha),
            "r": self.r,
            "x": number(self.x),
            "y": numbers(self.y.values()),
            "tol": number(self.settings.tol),
            "nodes": self.settings.max_nodes,
            "samples": self.args.samples,
            "seed": self.args.seed,
            "method": method,
        })
    }

    fn trivial(&self, method: Method) -> EvalResult {
        EvalResult { value: C64::new(1.0, 0.0), err_estimate: 0.0, method, effort: 0 }
    }

    fn contour(&self) -> Result<EvalResult> {
        if self.x == 0.0 {
            return Ok(self.trivial(Method::ContourI));
        }
        contour::eval(&self.params, &self.spike()?, &self.y, &self.settings)
    }

    fn series(&self) -> Result<EvalResult> {
        if self.x == 0.0 {
            return Ok(self.trivial(Method::Series));
        }
        jack::series_eval(&self.params, &self.spike()?, &self.y, self.settings.tol, jack::DEFAULT_MAX_TERMS)
    }

    fn sphere(&self) -> Result<EvalResult> {
        if self.x == 0.0 {
            return Ok(self.trivial(Method::SphereMc));
        }
        sphere::sphere_average(&self.params, &self.spike()?, &self.y, self.args.samples, self.args.seed)
    }

    /// Every contour route that applies to this `(r, α)`.
    fn contour_routes(&self) -> Result<Vec<EvalResult>> {
        if self.x == 0.0 {
            return Ok(vec![self.trivial(Method::ContourI)]);
        }
        let spike = self.spike()?;
        let (p, s, y, q) = (&self.params, &spike, &self.y, &self.settings);
        if spike.decompose().epsilon.is_none() {
            return Ok(vec![contour::eval_contour_i(p, s, y, q)?]);
        }
        let mut out = vec![contour::eval_contour_ii(p, s, y, q)?];
        if self.alpha == 2.0 {
            out.push(contour::eval_contour_iii(p, s, y, q)?);
        }
        Ok(out)
    }
}

fn method_name(choice: MethodChoice) -> &'static str {
    match choice {
        MethodChoice::Auto => "auto",
        MethodChoice::Contour => "contour",
        MethodChoice::Series => "series",
        MethodChoice::Sphere => "sphere",
    }
}

fn report_from(command: &'static str, params: Value, result: EvalResult, start: Instant) -> Report {
    Report {
        command,
        params,
        value: result.value,
        err_estimate: result.err_estimate,
        method: result.method.tag().to_string(),
        effort: result.effort,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        extra: Map::new(),
    }
}

fn run_eval(args: &FunctionArgs, start: Instant) -> Result<Report> {
    let problem = Problem::new(args)?;
    let result = match args.method {
        MethodChoice::Auto | MethodChoice::Contour => problem.contour()?,
        MethodChoice::Series => problem.series()?,
        MethodChoice::Sphere => problem.sphere()?,
    };
    Ok(report_from("eval", problem.echo(method_name(args.method)), result, start))
}

fn run_oracle(args: &FunctionArgs, start: Instant) -> Result<Report> {
    let problem = Problem::new(args)?;
    let result = problem.series()?;
    Ok(report_from("oracle", problem.echo("series"), result, start))
}

fn result_json(r: &EvalResult) -> Value {
    json!({
        "method": r.method.tag(),
        "value_re": number(r.value.re),
        "value_im": number(r.value.im),
        "err_estimate": number(r.err_estimate),
        "effort": r.effort,
    })
}

fn run_compare(args: &FunctionArgs, start: Instant) -> Result<Report> {
    let problem = Problem::new(args)?;
    let mut results = problem.contour_routes()?;
    // The series is skipped where it diverges; other failures are reported.
    match problem.series() {
        Ok(r) => results.push(r),
        Err(Error::Domain(_)) => {}
        Err(e) => return Err(e),
    }
    if args.method == MethodChoice::Sphere && problem.alpha == 2.0 {
        results.push(problem.sphere()?);
    }
    let mut gaps = Vec::new();
    let mut max_rel = 0.0f64;
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let abs = (results[i].value - results[j].value).norm();
            let rel = abs / results[i].value.norm().max(results[j].value.norm()).max(f64::MIN_POSITIVE);
            max_rel = max_rel.max(rel);
            gaps.push(json!({
                "pair": [results[i].method.tag(), results[j].method.tag()],
                "abs_gap": number(abs),
                "rel_gap": number(rel),
            }));
        }
    }
    let mut report = report_from("compare", problem.echo(method_name(args.method)), results[0], start);
    report.extra.insert("results".into(), Value::Array(results.iter().map(result_json).collect()));
    report.extra.insert("gaps".into(), Value::Array(gaps));
    report.extra.insert("max_rel_gap".into(), number(max_rel));
    Ok(report)
}

fn density_echo(args: &DensityArgs, f: &[f64]) -> Value {
    json!({
        "p": args.p,
        "n1": args.n1,
        "n2": args.n2,
        "h": number(args.h),
        "f": numbers(f),
        "tol": number(args.tol),
    })
}

fn density_report(command: &'static str, params: Value, v: density::DensityValue, start: Instant) -> Report {
    Report {
        command,
        params,
        value: C64::new(v.value, 0.0),
        err_estimate: v.err_estimate,
        method: v.method.map_or("closed-form", |m| m.tag()).to_string(),
        effort: v.effort,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        extra: Map::new(),
    }
}

fn design(args: &DensityArgs) -> Result<TwoSampleDesign> {
    let n2 = args.n2.ok_or_else(|| Error::Domain("--n2 is required".into()))?;
    TwoSampleDesign::new(args.p, args.n1, n2)
}

fn alternative(h: f64) -> Result<Option<SpikeAlternative>> {
    if h == 0.0 {
        Ok(None)
    } else {
        SpikeAlternative::new(h).map(Some)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("tol = {tol} must lie in (0, 1)")))
    }
}

fn run_density(args: &DensityArgs, start: Instant) -> Result<Report> {
    check_tol(args.tol)?;
    let f = values_or_file(&args.f, &args.f_file, "f")?;
    let config = EigenvalueConfig::new(f.clone())?;
    let v = density::joint_density(&config, alternative(args.h)?.as_ref(), &design(args)?, args.tol)?;
    Ok(density_report("density", density_echo(args, &f), v, start))
}

fn run_lr(args: &DensityArgs, start: Instant) -> Result<Report> {
    check_tol(args.tol)?;
    let f = values_or_file(&args.f, &args.f_file, "f")?;
    let config = EigenvalueConfig::new(f.clone())?;
    let design = design(args)?;
    let v = match alternative(args.h)? {
        None => density::DensityValue { value: 1.0, err_estimate: 0.0, method: None, effort: 0 },
        Some(alt) => density::lr_contour(alt.tau(), config.lambda(), &design, args.tol)?,
    };
    Ok(density_report("lr", density_echo(args, &f), v, start))
}

fn run_lr_limit(args: &DensityArgs, start: Instant) -> Result<Report> {
    check_tol(args.tol)?;
    let mu = values_or_file(&args.f, &args.f_file, "f")?;
    let v = match alternative(args.h)? {
        None => density::DensityValue { value: 1.0, err_estimate: 0.0, method: None, effort: 0 },
        Some(alt) => density::lr_limit(alt.tau(), &mu, args.p, args.n1, args.tol)?,
    };
    Ok(density_report("lr-limit", density_echo(args, &mu), v, start))
}

/// Executes one parsed command line.
pub fn run(cli: &Cli) -> Result<Report> {
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::Eval(a) => run_eval(a, start),
        Command::Oracle(a) => run_oracle(a, start),
        Command::Compare(a) => run_compare(a, start),
        Command::Density(a) => run_density(a, start),
        Command::Lr(a) => run_lr(a, start),
        Command::LrLimit(a) => run_lr_limit(a, start),
    }?;
    if cli.no_wall_time {
        report.wall_ms = 0.0;
    }
    Ok(report)
}

impl Report {
    fn fields(&self) -> Vec<(&'static str, Value)> {
        vec![
            ("command", Value::String(self.command.to_string())),
            ("params", self.params.clone()),
            ("value_re", number(self.value.re)),
            ("value_im", number(self.value.im)),
            ("err_estimate", number(self.err_estimate)),
            ("method", Value::String(self.method.clone())),
            ("effort", Value::from(self.effort)),
            ("wall_ms", number(self.wall_ms)),
        ]
    }

    pub fn to_json(&self) -> String {
        let mut map = Map::new();
        for (k, v) in self.fields() {
            map.insert(k.to_string(), v);
        }
        for (k, v) in &self.extra {
            map.insert(k.clone(), v.clone());
        }
        serde_json::to_string_pretty(&Value::Object(map)).unwrap_or_default()
    }

    /// One header row and one value row; nested values are embedded as JSON.
    pub fn to_csv(&self) -> String {
        let fields = self.fields();
        let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
        let cells: Vec<String> = fields
            .iter()
            .map(|(_, v)| match v {
                Value::String(s) => csv_cell(s),
                other => csv_cell(&other.to_string()),
            })
            .collect();
        format!("{}\n{}\n", header.join(","), cells.join(","))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json() + "\n",
            Format::Csv => self.to_csv(),
        }
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses the process arguments, runs the job and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
