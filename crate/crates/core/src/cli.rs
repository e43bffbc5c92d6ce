//! Command-line front end. [`run`] parses arguments, installs the worker pool, dispatches
//! one subcommand and writes a self-describing report.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::constants::{c0_euler, c0_series, koblitz_constant, moment_constant, ConstantValue, DEFAULT_TRUNCATION};
use crate::ec::{group_structure, make_curve, PrimeField};
use crate::family::{
    census_indices, compare_rows, full_residue_average, howe_count_classes, howe_prediction,
    main_term_sum, moment_contributions, prime_aggregates, prime_order_contributions, resume_sweep,
    sample_box_average, sweep, sweep_primes, variance_experiment, BoxSpec, CensusDomain,
};
use crate::invariants::{builtin_with_bound, ArithmeticFunction, DEFAULT_BOUND};
use crate::numtheory::log_integral;

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "ECTORSION_THREADS";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "ectorsion", version, about = "Group structure, torsion census and family averages of elliptic curves over prime fields")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Worker threads (default: $ECTORSION_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Plain `key=value` file of default flags; flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate c₀(f), a moment constant `moment:k`, or the Koblitz product `koblitz`.
    Constants(ConstantsArgs),
    /// Group structure (N, i, e) of a single curve.
    Structure(StructureArgs),
    /// Howe census S_d(p) and its deviation from p(p-1)/(dψ(d)φ(d)).
    Howe(HoweArgs),
    /// Main-term sum M(x) against c₀(f)·li(x).
    MainTerm(MainTermArgs),
    /// Moment sums of e_E(p)^k against C_k·li(x^(k+1)).
    Moments(MomentsArgs),
    /// Monte-Carlo average over the box |a| <= A, |b| <= B.
    SampleBox(SampleBoxArgs),
    /// Variance of Σ_p f(i_E(p)) around c₀(f)·li(x) over sampled curves.
    Variance(VarianceArgs),
    /// Prime-order census against the Koblitz constant times x/(log x)².
    KoblitzCensus(KoblitzArgs),
}

#[derive(Args, Debug, Serialize)]
struct ConstantsArgs {
    /// Builtin `name[:params]`, `moment:k` or `koblitz`.
    #[arg(long)]
    function: String,
    /// Series length D or product cutoff P.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncation: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Series)]
    method: MethodArg,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Series,
    Euler,
}

#[derive(Args, Debug, Serialize)]
struct StructureArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct HoweArgs {
    /// Largest prime swept.
    #[arg(long)]
    p_max: u64,
    #[arg(long, default_value_t = 5)]
    p_min: u64,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct MainTermArgs {
    #[arg(long, default_value = "cyclicity")]
    function: String,
    /// Ascending comma-separated x values.
    #[arg(long, value_delimiter = ',', required = true)]
    x_grid: Vec<f64>,
    /// Truncation for c₀(f).
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncation: u64,
    /// Resumable per-prime checkpoint (CSV, with a `.meta.json` sidecar).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct MomentsArgs {
    #[arg(long)]
    k: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    x_grid: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncation: u64,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct BoxArgs {
    /// Box half-width A for the coefficient a.
    #[arg(long = "box-a")]
    box_a: u64,
    /// Box half-width B for the coefficient b.
    #[arg(long = "box-b")]
    box_b: u64,
}

#[derive(Args, Debug, Serialize)]
struct SampleBoxArgs {
    #[arg(long, default_value = "cyclicity")]
    function: String,
    #[command(flatten)]
    #[serde(flatten)]
    bx: BoxArgs,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct VarianceArgs {
    #[arg(long, default_value = "cyclicity")]
    function: String,
    #[command(flatten)]
    #[serde(flatten)]
    bx: BoxArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    x_grid: Vec<f64>,
    /// Curves drawn per grid point.
    #[arg(long)]
    curves: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct KoblitzArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    x_grid: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncation: u64,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Constants(a) => &a.common,
            Command::Structure(a) => &a.common,
            Command::Howe(a) => &a.common,
            Command::MainTerm(a) => &a.common,
            Command::Moments(a) => &a.common,
            Command::SampleBox(a) => &a.common,
            Command::Variance(a) => &a.common,
            Command::KoblitzCensus(a) => &a.common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Structure(_) => "structure",
            Command::Howe(_) => "howe",
            Command::MainTerm(_) => "main-term",
            Command::Moments(_) => "moments",
            Command::SampleBox(_) => "sample-box",
            Command::Variance(_) => "variance",
            Command::KoblitzCensus(_) => "koblitz-census",
        }
    }

    /// The resolved configuration; pool size and output routing are left out so that
    /// reports do not depend on them.
    fn config(&self) -> Value {
        let v = match self {
            Command::Constants(a) => serde_json::to_value(a),
            Command::Structure(a) => serde_json::to_value(a),
            Command::Howe(a) => serde_json::to_value(a),
            Command::MainTerm(a) => serde_json::to_value(a),
            Command::Moments(a) => serde_json::to_value(a),
            Command::SampleBox(a) => serde_json::to_value(a),
            Command::Variance(a) => serde_json::to_value(a),
            Command::KoblitzCensus(a) => serde_json::to_value(a),
        };
        v.expect("argument structs serialize")
    }
}

type CliResult<T> = Result<T, Box<dyn std::error::Error + Send + Sync>>;

/// A finished report: scalar fields, optional table rows and summary values.
struct Report {
    command: &'static str,
    config: Value,
    fields: Map<String, Value>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Report {
    fn new(cmd: &Command) -> Self {
        Report { command: cmd.name(), config: cmd.config(), fields: Map::new(), columns: Vec::new(), rows: Vec::new() }
    }

    fn field(mut self, key: &str, v: impl Serialize) -> Self {
        self.fields.insert(key.to_string(), serde_json::to_value(v).expect("serializable"));
        self
    }

    fn table(mut self, columns: Vec<&'static str>, rows: Vec<Vec<Value>>) -> Self {
        self.columns = columns;
        self.rows = rows;
        self
    }

    fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("version".into(), json!(VERSION));
                obj.insert("command".into(), json!(self.command));
                obj.insert("config".into(), self.config.clone());
                obj.extend(self.fields.clone());
                if !self.columns.is_empty() {
                    let rows: Vec<Value> = self
                        .rows
                        .iter()
                        .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
                        .collect();
                    obj.insert("rows".into(), Value::Array(rows));
                }
                Ok(serde_json::to_string_pretty(&Value::Object(obj))? + "\n")
            }
            Format::Csv => {
                let mut out = format!("# ectorsion {VERSION} {}\n", self.command);
                if let Value::Object(cfg) = &self.config {
                    for (k, v) in cfg {
                        out.push_str(&format!("# {k}={}\n", scalar(v)));
                    }
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                if self.columns.is_empty() {
                    w.write_record(self.fields.keys())?;
                    w.write_record(self.fields.values().map(scalar))?;
                } else {
                    for (k, v) in &self.fields {
                        out.push_str(&format!("# {k}={}\n", scalar(v)));
                    }
                    w.write_record(&self.columns)?;
                    for r in &self.rows {
                        w.write_record(r.iter().map(scalar))?;
                    }
                }
                out.push_str(std::str::from_utf8(&w.into_inner().map_err(|e| e.into_error())?)?);
                Ok(out)
            }
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

fn function(spec: &str) -> CliResult<ArithmeticFunction> {
    Ok(builtin_with_bound(spec, DEFAULT_BOUND)?)
}

fn constant_fields(report: Report, name: &str, c: &ConstantValue) -> Report {
    report
        .field("name", name)
        .field("value", c.value)
        .field("tail_bound", c.tail_bound)
        .field("truncation", c.truncation)
        .field("method", c.method)
}

fn constants(cmd: &Command, a: &ConstantsArgs) -> CliResult<Report> {
    let spec = a.function.trim();
    let c = if spec == "koblitz" {
        koblitz_constant(a.truncation)?
    } else if let Some(k) = spec.strip_prefix("moment:") {
        moment_constant(k.parse()?, a.truncation)?
    } else {
        let af = function(spec)?;
        match a.method {
            MethodArg::Series => c0_series(&af, a.truncation)?,
            MethodArg::Euler => c0_euler(&af, a.truncation)?,
        }
    };
    Ok(constant_fields(Report::new(cmd), spec, &c))
}

fn structure(cmd: &Command, a: &StructureArgs) -> CliResult<Report> {
    let field = PrimeField::new(a.p)?;
    let curve = make_curve(field, field.reduce(a.a), field.reduce(a.b))?;
    let st = group_structure(&curve)?;
    Ok(Report::new(cmd).field("N", st.n).field("i", st.i).field("e", st.e).field("trace", st.trace))
}

fn howe(cmd: &Command, a: &HoweArgs) -> CliResult<Report> {
    let primes: Vec<u64> = sweep_primes(a.p_max as f64).into_iter().filter(|&p| p >= a.p_min).collect();
    let per_prime = sweep(&primes, |p, classes| {
        census_indices(p)
            .into_iter()
            .map(|d| {
                let all = howe_count_classes(classes, d, CensusDomain::All);
                let units = howe_count_classes(classes, d, CensusDomain::Units);
                let pred = howe_prediction(p, d);
                let dev = (all as f64 - pred).abs() / (p as f64).powf(1.5);
                vec![json!(p), json!(d), json!(all), json!(units), json!(pred), json!(dev)]
            })
            .collect::<Vec<_>>()
    })?;
    let rows: Vec<Vec<Value>> = per_prime.into_iter().flatten().collect();
    let max_dev = rows.iter().filter_map(|r| r[5].as_f64()).fold(0.0, f64::max);
    Ok(Report::new(cmd)
        .field("max_normalized_dev", max_dev)
        .table(vec!["p", "d", "s_all", "s_units", "prediction", "normalized_dev"], rows))
}

fn grid_top(grid: &[f64]) -> CliResult<f64> {
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|x| !(*x >= 2.0)) {
        return Err("grid must be strictly ascending with every x >= 2".into());
    }
    grid.last().copied().ok_or_else(|| "empty grid".into())
}

fn main_term(cmd: &Command, a: &MainTermArgs) -> CliResult<Report> {
    let af = function(&a.function)?;
    let top = grid_top(&a.x_grid)?;
    let c0 = c0_series(&af, a.truncation)?;
    let aggs = match &a.checkpoint {
        Some(path) => resume_sweep(path, &af, top)?,
        None => prime_aggregates(&sweep_primes(top), &af)?,
    };
    let rows = compare_rows(&a.x_grid, &aggs, c0.value)?
        .into_iter()
        .map(|r| vec![json!(r.x), json!(r.main_term), json!(r.c0_li), json!(r.rel_err)])
        .collect();
    Ok(Report::new(cmd)
        .field("c0", c0.value)
        .field("c0_tail_bound", c0.tail_bound)
        .table(vec!["x", "main_term", "c0_li", "rel_err"], rows))
}

/// Running sums of per-prime contributions evaluated at each grid point.
fn prefix_at(grid: &[f64], primes: &[u64], parts: &[f64]) -> Vec<f64> {
    let mut acc = crate::constants::Kahan::default();
    let mut next = 0;
    grid.iter()
        .map(|&x| {
            while next < primes.len() && primes[next] as f64 <= x {
                acc.add(parts[next]);
                next += 1;
            }
            acc.value()
        })
        .collect()
}

fn moments(cmd: &Command, a: &MomentsArgs) -> CliResult<Report> {
    let top = grid_top(&a.x_grid)?;
    let ck = if a.k == 0 { 1.0 } else { moment_constant(a.k, a.truncation)?.value };
    let primes = sweep_primes(top);
    let parts = moment_contributions(&primes, a.k)?;
    let rows = a
        .x_grid
        .iter()
        .zip(prefix_at(&a.x_grid, &primes, &parts))
        .map(|(&x, m)| {
            let cmp = ck * log_integral(x.powi(a.k as i32 + 1)).expect("x >= 2");
            vec![json!(x), json!(m), json!(cmp), json!((m - cmp).abs() / cmp)]
        })
        .collect();
    Ok(Report::new(cmd).field("ck", ck).table(vec!["x", "moment_sum", "ck_li", "rel_err"], rows))
}

fn warn_thin_box(bx: &BoxSpec, x: f64) {
    let ab = bx.a as f64 * bx.b as f64;
    let threshold = x * x.ln().powi(6);
    if ab <= threshold {
        eprintln!("warning: AB = {ab:e} <= x (log x)^6 = {threshold:e}; the box is thin for this x");
    }
}

fn sample_box(cmd: &Command, a: &SampleBoxArgs) -> CliResult<Report> {
    let af = function(&a.function)?;
    let bx = BoxSpec::new(a.bx.box_a, a.bx.box_b)?;
    warn_thin_box(&bx, a.x);
    let r = sample_box_average(&bx, a.x, a.samples, a.seed, &af)?;
    let (m, _) = main_term_sum(a.x, &af)?;
    let full = full_residue_average(a.x, &af)?;
    Ok(Report::new(cmd)
        .field("estimate", r.estimate)
        .field("std_error", r.std_error)
        .field("n_samples", r.n_samples)
        .field("seed", r.seed)
        .field("main_term", m)
        .field("full_residue_average", full))
}

fn variance(cmd: &Command, a: &VarianceArgs) -> CliResult<Report> {
    let af = function(&a.function)?;
    let bx = BoxSpec::new(a.bx.box_a, a.bx.box_b)?;
    grid_top(&a.x_grid)?;
    let mut rows = Vec::new();
    for &x in &a.x_grid {
        warn_thin_box(&bx, x);
        let r = variance_experiment(&bx, x, a.curves, &af, a.seed)?;
        rows.push(vec![json!(r.x), json!(r.sample_variance), json!(r.normalized_ratio)]);
    }
    Ok(Report::new(cmd).table(vec!["x", "sample_variance", "normalized_ratio"], rows))
}

fn koblitz_census(cmd: &Command, a: &KoblitzArgs) -> CliResult<Report> {
    let top = grid_top(&a.x_grid)?;
    let k = koblitz_constant(a.truncation)?;
    let primes = sweep_primes(top);
    let parts = prime_order_contributions(&primes)?;
    let rows = a
        .x_grid
        .iter()
        .zip(prefix_at(&a.x_grid, &primes, &parts))
        .map(|(&x, c)| {
            let cmp = k.value * x / (x.ln() * x.ln());
            vec![json!(x), json!(c), json!(cmp), json!(c / cmp)]
        })
        .collect();
    Ok(Report::new(cmd)
        .field("koblitz_constant", k.value)
        .table(vec!["x", "census", "koblitz_x_over_log2", "ratio"], rows))
}

fn dispatch(cmd: &Command) -> CliResult<Report> {
    match cmd {
        Command::Constants(a) => constants(cmd, a),
        Command::Structure(a) => structure(cmd, a),
        Command::Howe(a) => howe(cmd, a),
        Command::MainTerm(a) => main_term(cmd, a),
        Command::Moments(a) => moments(cmd, a),
        Command::SampleBox(a) => sample_box(cmd, a),
        Command::Variance(a) => variance(cmd, a),
        Command::KoblitzCensus(a) => koblitz_census(cmd, a),
    }
}

/// Reads `key=value` lines (blank lines and `#` comments skipped) into `--key value` pairs.
fn config_args(path: &Path) -> CliResult<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config {} line {}: expected key=value", path.display(), n + 1))?;
        out.push(format!("--{}", k.trim().replace('_', "-")).into());
        out.push(v.trim().into());
    }
    Ok(out)
}

/// Splices the config file's flags in directly after the subcommand name, so that any flag
/// given on the command line comes later and wins.
fn with_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 1);
    let Some(sub) = sub else { return Ok(args) };
    let mut out = args[..=sub].to_vec();
    out.extend(config_args(&path)?);
    out.extend(args[sub + 1..].iter().cloned());
    Ok(out)
}

fn thread_count(flag: Option<usize>) -> CliResult<usize> {
    if let Some(n) = flag {
        return if n == 0 { Err("--threads must be at least 1".into()) } else { Ok(n) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("{THREADS_ENV}={v} is not a positive integer").into()),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let common = cli.command.common();
    let threads = thread_count(common.threads)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let report = pool.install(|| dispatch(&cli.command))?;
    let text = report.render(common.format)?;
    match &common.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs the CLI on `args` (program name first) and returns the exit status:
/// 0 on success, 1 for operation errors, 2 for usage errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match with_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
