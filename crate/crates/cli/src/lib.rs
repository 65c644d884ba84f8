//! Command-line front end: curves as CSV (or JSON rows), reports as JSON.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors (including
//! an unwritable output path), 2 when the numerics give up.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use volheat::bounds::{bounds_report, DEFAULT_X_POINTS};
use volheat::heat::{eval_flux0, HeatProblem};
use volheat::odecheck::{full_equivalence_report, Forcing};
use volheat::series::{combine, eval_i_derivative, eval_j_derivative, SeriesOptions, DEFAULT_TERM_CAP};
use volheat::volterra::solve_volterra;
use volheat::ModelParams;

pub const TERM_CAP_ENV: &str = "VOLTERRA_TERM_CAP";

/// Bounds runs sample this many parameter values.
pub const BOUNDS_LAMBDA_SAMPLES: usize = 9;
/// Time levels and space points written by `heat`.
pub const HEAT_TIME_LEVELS: usize = 10;
pub const HEAT_X_POINTS: usize = 41;

#[derive(Debug, Parser)]
#[command(
    name = "volheat",
    version,
    about = "Weakly singular Volterra equation, singular ODE and nonclassical heat problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Series solution: t,y,I,J,terms_used
    Series(CommonArgs),
    /// Marching solver against the series: t,y_numeric,y_series,abs_diff
    Volterra(CommonArgs),
    /// ODE equivalence report (JSON)
    Equivalence(EquivalenceArgs),
    /// Temperature field: x,t,u,flux0
    Heat(CommonArgs),
    /// Parameter-dependence bounds report (JSON)
    Bounds(CommonArgs),
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long = "t-max", default_value_t = 1.0, allow_negative_numbers = true)]
    t_max: f64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 1e-10, allow_negative_numbers = true)]
    tol: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    h0: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    epsilon: f64,
    /// Defaults to 8 sqrt(t-max)
    #[arg(long = "x-max", allow_negative_numbers = true)]
    x_max: Option<f64>,
    /// Defaults to stdout
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
struct EquivalenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Forcing constant the ODE residual is measured against
    #[arg(long, value_enum, default_value_t = ForcingArg::PaperEq1)]
    forcing: ForcingArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ForcingArg {
    /// lambda / sqrt(pi)
    #[value(name = "eq18")]
    Eq18,
    /// lambda / (2 sqrt(pi))
    #[value(name = "paper-eq1")]
    PaperEq1,
}

impl From<ForcingArg> for Forcing {
    fn from(f: ForcingArg) -> Self {
        match f {
            ForcingArg::Eq18 => Forcing::OverSqrtPi,
            ForcingArg::PaperEq1 => Forcing::HalfOverSqrtPi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcommandKind {
    Series,
    Volterra,
    Equivalence,
    Heat,
    Bounds,
}

/// Fully resolved and validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: SubcommandKind,
    pub lambda: f64,
    pub t_max: f64,
    pub steps: usize,
    pub tol: f64,
    pub h0: f64,
    pub epsilon: f64,
    pub x_max: f64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub forcing: Forcing,
    pub term_cap: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(clap::Error),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(volheat::Error),
    #[error("cannot write output {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<volheat::Error> for CliError {
    fn from(e: volheat::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "--{name} must be a finite positive number, got {v}"
        )))
    }
}

impl RunConfig {
    fn from_args(kind: SubcommandKind, a: CommonArgs, forcing: Forcing, term_cap: usize) -> Result<Self, CliError> {
        let default_format = match kind {
            SubcommandKind::Equivalence | SubcommandKind::Bounds => Format::Json,
            _ => Format::Csv,
        };
        let cfg = RunConfig {
            subcommand: kind,
            lambda: a.lambda,
            t_max: a.t_max,
            steps: a.steps,
            tol: a.tol,
            h0: a.h0,
            epsilon: a.epsilon,
            x_max: a.x_max.unwrap_or(8.0 * a.t_max.abs().sqrt()),
            output_path: a.output,
            format: a.format.unwrap_or(default_format),
            forcing,
            term_cap,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Per-subcommand checks, run before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        use SubcommandKind::*;
        if !self.lambda.is_finite() {
            return Err(CliError::Invalid("--lambda must be finite".into()));
        }
        positive("t-max", self.t_max)?;
        positive("tol", self.tol)?;
        let min_steps = match self.subcommand {
            Series => 1,
            Volterra | Heat | Bounds => 2,
            Equivalence => 100,
        };
        if self.steps < min_steps {
            return Err(CliError::Invalid(format!(
                "--steps must be at least {min_steps}, got {}",
                self.steps
            )));
        }
        if matches!(self.subcommand, Heat | Bounds) {
            positive("h0", self.h0)?;
        }
        if self.subcommand == Bounds && !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Invalid(format!(
                "--epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if matches!(self.subcommand, Heat | Bounds) {
            positive("x-max", self.x_max)?;
        }
        if matches!(self.subcommand, Equivalence | Bounds) && self.format == Format::Csv {
            return Err(CliError::Invalid("reports are written as JSON only".into()));
        }
        if self.term_cap == 0 {
            return Err(CliError::Invalid(format!("{TERM_CAP_ENV} must be at least 1")));
        }
        Ok(())
    }

    fn series_options(&self) -> SeriesOptions {
        SeriesOptions::new(self.tol).with_term_cap(self.term_cap)
    }

    fn params(&self) -> Result<ModelParams, CliError> {
        let eps = if self.epsilon > 0.0 && self.epsilon < 1.0 {
            self.epsilon
        } else {
            0.5
        };
        let h0 = if self.h0 > 0.0 { self.h0 } else { 1.0 };
        Ok(ModelParams::new(self.lambda, self.t_max, h0, eps)?)
    }
}

fn term_cap_from_env(value: Option<OsString>) -> Result<usize, CliError> {
    match value {
        None => Ok(DEFAULT_TERM_CAP),
        Some(v) => v
            .to_str()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| CliError::Invalid(format!("{TERM_CAP_ENV} must be a positive integer, got {v:?}"))),
    }
}

/// Parses `argv` (program name first) into a validated configuration.
pub fn parse_config<I, T>(argv: I, term_cap_env: Option<OsString>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Usage)?;
    let term_cap = term_cap_from_env(term_cap_env)?;
    let default_forcing = Forcing::default();
    match cli.command {
        Command::Series(a) => RunConfig::from_args(SubcommandKind::Series, a, default_forcing, term_cap),
        Command::Volterra(a) => RunConfig::from_args(SubcommandKind::Volterra, a, default_forcing, term_cap),
        Command::Heat(a) => RunConfig::from_args(SubcommandKind::Heat, a, default_forcing, term_cap),
        Command::Bounds(a) => RunConfig::from_args(SubcommandKind::Bounds, a, default_forcing, term_cap),
        Command::Equivalence(e) => {
            RunConfig::from_args(SubcommandKind::Equivalence, e.common, e.forcing.into(), term_cap)
        }
    }
}

/// Fixed 17-significant-digit rendering used in CSV cells.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_document(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Invalid(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(internal)?;
    for r in rows {
        w.write_record(r).map_err(internal)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Invalid(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

fn json_document<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(format!("json encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Float(f64),
    Count(usize),
    Empty,
}

impl Cell {
    fn csv(self) -> String {
        match self {
            Cell::Float(v) => fmt_float(v),
            Cell::Count(n) => n.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(self) -> serde_json::Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Count(n) => serde_json::Value::from(n),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Curves are tables of named columns; JSON renders each row as an object
/// with the same keys.
fn table(cfg: &RunConfig, header: &[&str], rows: Vec<Vec<Cell>>) -> Result<String, CliError> {
    match cfg.format {
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|c| c.csv()).collect()).collect();
            csv_document(header, &cells)
        }
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| header.iter().zip(r).map(|(k, v)| (k.to_string(), v.json())).collect())
                .collect();
            json_document(&objs)
        }
    }
}

fn run_series(cfg: &RunConfig) -> Result<String, CliError> {
    let opts = cfg.series_options();
    let half = SeriesOptions {
        tol: 0.5 * opts.tol,
        ..opts
    };
    let dt = cfg.t_max / cfg.steps as f64;
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    for k in 0..=cfg.steps {
        let t = k as f64 * dt;
        let i = eval_i_derivative(cfg.lambda, t, 0, &half)?;
        let j = eval_j_derivative(cfg.lambda, t, 0, &half)?;
        let y = combine(&i, &j);
        rows.push(vec![
            Cell::Float(t),
            Cell::Float(y.value),
            Cell::Float(i.value),
            Cell::Float(j.value),
            Cell::Count(y.terms_used),
        ]);
    }
    table(cfg, &["t", "y", "I", "J", "terms_used"], rows)
}

fn run_volterra(cfg: &RunConfig) -> Result<String, CliError> {
    let opts = cfg.series_options();
    let numeric = solve_volterra(cfg.lambda, cfg.t_max, cfg.steps)?;
    let mut rows = Vec::with_capacity(numeric.len());
    for (i, t) in numeric.times().enumerate() {
        let s = volheat::series::eval_y_with(cfg.lambda, t, 0, &opts)?.value;
        let n = numeric.values[i];
        rows.push(vec![
            Cell::Float(t),
            Cell::Float(n),
            Cell::Float(s),
            Cell::Float((n - s).abs()),
        ]);
    }
    table(cfg, &["t", "y_numeric", "y_series", "abs_diff"], rows)
}

fn run_heat(cfg: &RunConfig) -> Result<String, CliError> {
    let opts = cfg.series_options();
    let problem = HeatProblem::with_options(cfg.lambda, cfg.h0, opts)?;
    let mut rows = Vec::new();
    for k in 1..=HEAT_TIME_LEVELS {
        let t = cfg.t_max * k as f64 / HEAT_TIME_LEVELS as f64;
        let slice = problem.slice(t)?;
        for ix in 0..HEAT_X_POINTS {
            let x = cfg.x_max * ix as f64 / (HEAT_X_POINTS - 1) as f64;
            let u = slice.u(x)?;
            let flux = if ix == 0 {
                Cell::Float(eval_flux0(cfg.lambda, cfg.h0, t, cfg.steps, opts)?)
            } else {
                Cell::Empty
            };
            rows.push(vec![Cell::Float(x), Cell::Float(t), Cell::Float(u), flux]);
        }
    }
    table(cfg, &["x", "t", "u", "flux0"], rows)
}

fn run_equivalence(cfg: &RunConfig) -> Result<String, CliError> {
    let report = full_equivalence_report(&cfg.params()?, cfg.steps, cfg.series_options(), cfg.forcing)?;
    json_document(&report)
}

fn run_bounds(cfg: &RunConfig) -> Result<String, CliError> {
    let mut xs: Vec<f64> = (0..DEFAULT_X_POINTS)
        .map(|i| cfg.x_max * i as f64 / (DEFAULT_X_POINTS - 1) as f64)
        .collect();
    xs.push(f64::INFINITY);
    let report = bounds_report(
        &cfg.params()?,
        BOUNDS_LAMBDA_SAMPLES,
        cfg.steps,
        Some(&xs),
        cfg.series_options(),
    )?;
    json_document(&report)
}

/// Computes the document a configuration asks for.
pub fn render(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.subcommand {
        SubcommandKind::Series => run_series(cfg),
        SubcommandKind::Volterra => run_volterra(cfg),
        SubcommandKind::Equivalence => run_equivalence(cfg),
        SubcommandKind::Heat => run_heat(cfg),
        SubcommandKind::Bounds => run_bounds(cfg),
    }
}

fn emit(cfg: &RunConfig, doc: &str) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(path) => std::fs::write(path, doc).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(doc.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Output {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Entry point shared by the binary and tests. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_config(argv, std::env::var_os(TERM_CAP_ENV)) {
        Ok(cfg) => cfg,
        Err(CliError::Usage(e)) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match render(&cfg).and_then(|doc| emit(&cfg, &doc)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
