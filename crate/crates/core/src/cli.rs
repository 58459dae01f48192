//! The `coxsub` command-line front end.
//!
//! Every command writes tidy CSV and/or JSON into `--out` together with a
//! `manifest.json` that echoes the resolved configuration. A `--config FILE`
//! of `key = value` lines supplies defaults that explicit flags override.
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::cox::{breslow, full_data_sandwich, newton_solve, SolverOptions};
use crate::data::{load_csv, save_csv, CsvSchema, SortedCohort};
use crate::error::CoxError;
use crate::rng::{label, substream};
use crate::simulation::{
    calibrate_censoring, gen_cohort, Baseline, ScenarioConfig, ScenarioResult, BETA0,
};
use crate::stats::{mean, mean_se, sample_sd};
use crate::subsampling::Method;
use crate::weighted::{run_algorithm1_with, wald_intervals, Algorithm1Options, VarianceKind};

pub const THREADS_ENV: &str = "COXSUB_THREADS";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "coxsub",
    version,
    about = "Cox regression via two-stage optimal subsampling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo study on a synthetic scenario.
    Simulate(SimulateArgs),
    /// Full-data Cox fit of a CSV file.
    Fit(FitArgs),
    /// Full-data fit plus B repeated subsample fits per method and r.
    Analyze(AnalyzeArgs),
    /// Write one synthetic cohort as CSV.
    Generate(GenerateArgs),
}

/// Subsample size(s): `500`, `100,300` or `100..500:100` (inclusive).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RGrid(pub Vec<usize>);

impl std::str::FromStr for RGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid r {s:?}: expected N, N,M,... or START..END:STEP");
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        let grid = if let Some((start, rest)) = s.split_once("..") {
            let (end, step) = rest.split_once(':').unwrap_or((rest, "1"));
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if step == 0 || end < start {
                return Err(bad());
            }
            (start..=end).step_by(step).collect()
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        if grid.is_empty() || grid.contains(&0) {
            return Err(bad());
        }
        Ok(RGrid(grid))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Uniform,
    #[value(alias = "cen-opt", alias = "cen_opt")]
    Cenopt,
    #[value(alias = "full-opt", alias = "full_opt")]
    Fullopt,
    All,
}

impl MethodArg {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Uniform => vec![Method::Uniform],
            MethodArg::Cenopt => vec![Method::CenOpt],
            MethodArg::Fullopt => vec![Method::FullOpt],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

/// `const:RATE` or `linear`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BaselineArg(pub Baseline);

impl std::str::FromStr for BaselineArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("linear") {
            return Ok(BaselineArg(Baseline::Linear));
        }
        let rate = s
            .strip_prefix("const:")
            .and_then(|r| r.parse::<f64>().ok())
            .filter(|r| r.is_finite() && *r > 0.0)
            .ok_or_else(|| format!("invalid baseline {s:?}: expected const:RATE or linear"))?;
        Ok(BaselineArg(Baseline::Constant(rate)))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScenarioArgs {
    /// Standard scenario 1-4.
    #[arg(long)]
    pub case: Option<u8>,
    /// Cohort size (overrides the case default).
    #[arg(long)]
    pub n: Option<usize>,
    /// Baseline hazard for a custom scenario.
    #[arg(long)]
    pub baseline: Option<BaselineArg>,
    /// Target censoring rate for a custom scenario.
    #[arg(long)]
    pub censoring: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Subsample sizes: `500`, `100,300` or `100..500:100` (default 100..500:100)
    #[arg(long)]
    pub r: Option<RGrid>,
    /// Replicates per cell (default 1000)
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long, value_enum, default_value = "all")]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Subsample covariance estimator: influence or printed.
    #[arg(long, default_value = "influence")]
    pub variance: VarianceKind,
    #[arg(long, default_value = "coxsub-out")]
    pub out: PathBuf,
    /// `key = value` defaults, overridden by explicit flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SchemaArgs {
    /// CSV file with a header row
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "time")]
    pub time_col: String,
    #[arg(long, default_value = "status")]
    pub status_col: String,
    /// Comma-separated covariate columns; defaults to every other column.
    #[arg(long)]
    pub covariates: Option<String>,
    /// Comma-separated covariates to expand into dummies.
    #[arg(long)]
    pub categorical: Option<String>,
    /// Comma-separated numeric covariates whose missing cells get the column median.
    #[arg(long)]
    pub median_fill: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct FitArgs {
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value = "coxsub-out")]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub schema: SchemaArgs,
    /// Subsample sizes: `500`, `100,300` or `100..500:100`
    #[arg(long, default_value = "500")]
    pub r: RGrid,
    /// Repeated subsample fits per method and r
    #[arg(long, default_value_t = 100)]
    pub b: usize,
    #[arg(long, value_enum, default_value = "all")]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Subsample covariance estimator: influence or printed.
    #[arg(long, default_value = "influence")]
    pub variance: VarianceKind,
    #[arg(long, default_value = "coxsub-out")]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "coxsub-out")]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Usage errors exit with 2, everything else with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(CoxError),
}

impl From<CoxError> for Failure {
    fn from(e: CoxError) -> Self {
        Failure::Runtime(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "usage error: {msg}"),
            Failure::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parse `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(usage(format!(
                "config line {}: invalid key {:?}",
                i + 1,
                k.trim()
            )));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Splice config-file entries in front of the explicit flags so that the
/// explicit occurrence wins.
fn expand_config(argv: Vec<String>) -> CliResult<Vec<String>> {
    if argv.len() < 2 {
        return Ok(argv);
    }
    let Some(path) = config_path(&argv[2..]) else {
        return Ok(argv);
    };
    let text =
        fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let mut out = argv[..2].to_vec();
    for (k, v) in parse_config(&text)? {
        out.push(format!("--{k}"));
        out.push(v);
    }
    out.extend_from_slice(&argv[2..]);
    Ok(out)
}

fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("{f}");
            return f.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{f}");
            if let Failure::Runtime(e) = &f {
                let mut src = std::error::Error::source(e);
                while let Some(s) = src {
                    eprintln!("  caused by: {s}");
                    src = s.source();
                }
            }
            f.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let threads = threads_from_env()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Runtime(CoxError::Invalid(format!("thread pool: {e}"))))?;
    let start = Instant::now();
    let result = pool.install(|| match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Generate(a) => cmd_generate(a),
    });
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    result
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a C,
    result: R,
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CoxError::io(dir, e).into())
}

fn create_file(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CoxError::io(path, e).into())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create_file(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CoxError::io(path, std::io::Error::other(e)))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| CoxError::io(path, e).into())
}

fn write_manifest<C: Serialize, R: Serialize>(
    dir: &Path,
    command: &'static str,
    config: &C,
    result: R,
) -> CliResult<()> {
    write_json(
        &dir.join("manifest.json"),
        &Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            result,
        },
    )
}

fn check_level(level: f64) -> CliResult<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--level must lie in (0, 1), got {level}")))
    }
}

fn scenario_base(a: &ScenarioArgs, seed: u64) -> CliResult<ScenarioConfig> {
    let mut config = match a.case {
        Some(k) => ScenarioConfig::case(k, seed).map_err(|e| usage(e.to_string()))?,
        None => {
            let (Some(BaselineArg(baseline)), Some(cens)) = (a.baseline, a.censoring) else {
                return Err(usage(
                    "either --case or both --baseline and --censoring are required",
                ));
            };
            let mut c = ScenarioConfig::case(1, seed).expect("case 1 exists");
            c.name = "custom".into();
            c.baseline = baseline;
            c.target_censoring = cens;
            c
        }
    };
    if a.case.is_some() {
        if let Some(BaselineArg(b)) = a.baseline {
            config.baseline = b;
        }
        if let Some(c) = a.censoring {
            config.target_censoring = c;
        }
    }
    if let Some(n) = a.n {
        config.n = n;
    }
    if !(config.target_censoring > 0.0 && config.target_censoring < 1.0) {
        return Err(usage("--censoring must lie in (0, 1)"));
    }
    Ok(config)
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<()> {
    check_level(a.level)?;
    let mut config = scenario_base(&a.scenario, a.seed)?;
    if let Some(r) = &a.r {
        config.r_grid = r.0.clone();
    }
    if let Some(b) = a.b {
        config.b = b;
    }
    config.methods = a.method.methods();
    config.level = a.level;
    config.variance = a.variance;
    config.validate().map_err(|e| usage(e.to_string()))?;

    let result = crate::simulation::run_scenario(&config)?;
    create_dir(&a.out)?;
    result
        .table
        .write_coords_csv(create_file(&a.out.join("metrics.csv"))?)?;
    result
        .table
        .write_summary_csv(create_file(&a.out.join("summary.csv"))?)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let ScenarioResult {
        config,
        calibration,
        realized_censoring,
        total_failures,
        warnings,
        ..
    } = result;
    write_manifest(
        &a.out,
        "simulate",
        a,
        serde_json::json!({
            "scenario": config,
            "calibrated_c": calibration.c,
            "calibrated_censoring": calibration.achieved,
            "realized_censoring": realized_censoring,
            "failures": total_failures,
            "warnings": warnings,
        }),
    )
}

fn split_list(s: &Option<String>) -> Vec<String> {
    s.as_deref()
        .map(|s| {
            s.split(',')
                .map(|x| x.trim().to_string())
                .filter(|x| !x.is_empty())
                .collect()
        })
        .unwrap_or_default()
}

fn resolve_schema(a: &SchemaArgs) -> CliResult<CsvSchema> {
    let mut covariates = split_list(&a.covariates);
    if covariates.is_empty() {
        let mut rdr = csv::Reader::from_path(&a.input).map_err(CoxError::from)?;
        let headers = rdr.headers().map_err(CoxError::from)?;
        covariates = headers
            .iter()
            .map(|h| h.trim().to_string())
            .filter(|h| *h != a.time_col && *h != a.status_col)
            .collect();
    }
    Ok(CsvSchema {
        time_col: a.time_col.clone(),
        status_col: a.status_col.clone(),
        covariates,
        categorical: split_list(&a.categorical)
            .into_iter()
            .collect::<BTreeSet<_>>(),
        median_fill: split_list(&a.median_fill)
            .into_iter()
            .collect::<BTreeSet<_>>(),
    })
}

fn load_cohort(a: &SchemaArgs) -> CliResult<(CsvSchema, SortedCohort)> {
    if !a.input.exists() {
        return Err(Failure::Runtime(CoxError::io(
            &a.input,
            std::io::Error::from(std::io::ErrorKind::NotFound),
        )));
    }
    let schema = resolve_schema(a)?;
    let cohort = load_csv(&a.input, &schema)?;
    Ok((schema, SortedCohort::new(cohort)))
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub n: usize,
    pub events: usize,
    pub censoring_rate: f64,
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub level: f64,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub loglik: f64,
    pub score_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub baseline: crate::cox::BaselineHazard,
}

fn full_fit(cohort: &SortedCohort, level: f64) -> CliResult<FitReport> {
    let fit = newton_solve(cohort, &vec![0.0; cohort.p()], &SolverOptions::default())?;
    if !fit.converged {
        return Err(Failure::Runtime(CoxError::NotConverged {
            iterations: fit.iterations,
            score_norm: fit.score_norm,
            beta: fit.beta,
        }));
    }
    let sigma = full_data_sandwich(cohort, &fit)?;
    let se: Vec<f64> = sigma.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect();
    let ci = wald_intervals(&fit.beta, &se, level)?;
    let baseline = breslow(cohort, &fit.beta)?;
    Ok(FitReport {
        n: cohort.len(),
        events: cohort.event_count(),
        censoring_rate: cohort.censoring_rate(),
        names: cohort.base().names().to_vec(),
        ci_lower: ci.iter().map(|c| c.lower).collect(),
        ci_upper: ci.iter().map(|c| c.upper).collect(),
        beta: fit.beta,
        se,
        level,
        loglik: fit.loglik,
        score_norm: fit.score_norm,
        iterations: fit.iterations,
        converged: fit.converged,
        baseline,
    })
}

fn cmd_fit(a: &FitArgs) -> CliResult<()> {
    check_level(a.level)?;
    let (schema, cohort) = load_cohort(&a.schema)?;
    let report = full_fit(&cohort, a.level)?;
    create_dir(&a.out)?;
    write_json(&a.out.join("fit.json"), &report)?;
    write_manifest(
        &a.out,
        "fit",
        a,
        serde_json::json!({ "schema": schema, "n": report.n, "events": report.events }),
    )
}

/// Subsample summary for one coordinate, against the full-data estimate.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisCoord {
    pub name: String,
    pub full: f64,
    pub mean: f64,
    /// `None` when fewer than two replicates succeeded.
    pub sse: Option<f64>,
    pub ese: f64,
    /// `(1/B) Σ_b (β̃_j − β̂_j)²`.
    pub mse: f64,
    pub mse_se: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisCell {
    pub method: Method,
    pub r: usize,
    pub replicates: usize,
    pub failures: usize,
    pub coords: Vec<AnalysisCoord>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub full: FitReport,
    pub cells: Vec<AnalysisCell>,
}

struct Replicate {
    beta: Vec<f64>,
    se: Vec<f64>,
    warnings: Vec<String>,
}

fn analysis_cell(
    cohort: &SortedCohort,
    full: &FitReport,
    method: Method,
    r: usize,
    b: usize,
    seed: u64,
    variance: VarianceKind,
) -> AnalysisCell {
    let opts = Algorithm1Options {
        lambda_variance: false,
        variance,
        ..Default::default()
    };
    let reps: Vec<std::result::Result<Replicate, String>> = (0..b)
        .into_par_iter()
        .map(|rep| {
            let mut rng = substream(
                seed,
                &[label::REPLICATE, rep as u64, method.index(), r as u64],
            );
            let out = run_algorithm1_with(cohort, r, method, &mut rng, &opts)
                .map_err(|e| e.to_string())?;
            let se = out.fit.se();
            if !out.fit.converged || se.iter().any(|s| !s.is_finite()) {
                return Err("subsample fit did not converge".into());
            }
            Ok(Replicate {
                beta: out.fit.beta,
                se,
                warnings: out.warnings,
            })
        })
        .collect();
    let mut warnings = BTreeSet::new();
    let mut errors = BTreeSet::new();
    let ok: Vec<&Replicate> = reps
        .iter()
        .filter_map(|r| match r {
            Ok(rep) => {
                warnings.extend(rep.warnings.iter().cloned());
                Some(rep)
            }
            Err(e) => {
                errors.insert(e.clone());
                None
            }
        })
        .collect();
    let failures = b - ok.len();
    let mut warnings: Vec<String> = warnings.into_iter().collect();
    if failures > 0 {
        warnings.push(format!("{failures} of {b} replicates failed"));
        warnings.extend(errors.into_iter().map(|e| format!("replicate error: {e}")));
    }
    let coords = if ok.is_empty() {
        Vec::new()
    } else {
        (0..full.beta.len())
            .map(|j| {
                let est: Vec<f64> = ok.iter().map(|r| r.beta[j]).collect();
                let sq: Vec<f64> = est.iter().map(|x| (x - full.beta[j]).powi(2)).collect();
                AnalysisCoord {
                    name: full.names[j].clone(),
                    full: full.beta[j],
                    mean: mean(&est),
                    sse: sample_sd(&est),
                    ese: mean(&ok.iter().map(|r| r.se[j]).collect::<Vec<_>>()),
                    mse: mean(&sq),
                    mse_se: mean_se(&sq),
                }
            })
            .collect()
    };
    AnalysisCell {
        method,
        r,
        replicates: ok.len(),
        failures,
        coords,
        warnings,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_analysis_csv<W: Write>(report: &AnalysisReport, w: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(w);
    let rec =
        |w: &mut csv::Writer<W>, fields: &[String]| w.write_record(fields).map_err(CoxError::from);
    rec(
        &mut w,
        &[
            "method",
            "r",
            "coord",
            "full",
            "mean",
            "sse",
            "ese",
            "mse",
            "mse_se",
            "replicates",
            "failures",
        ]
        .map(String::from),
    )?;
    for cell in &report.cells {
        for c in &cell.coords {
            rec(
                &mut w,
                &[
                    cell.method.to_string(),
                    cell.r.to_string(),
                    c.name.clone(),
                    c.full.to_string(),
                    c.mean.to_string(),
                    opt(c.sse),
                    c.ese.to_string(),
                    c.mse.to_string(),
                    opt(c.mse_se),
                    cell.replicates.to_string(),
                    cell.failures.to_string(),
                ],
            )?;
        }
    }
    w.flush()
        .map_err(|e| CoxError::io("<csv writer>", e).into())
}

fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<()> {
    check_level(a.level)?;
    if a.b == 0 {
        return Err(usage("--b must be at least 1"));
    }
    let (schema, cohort) = load_cohort(&a.schema)?;
    let min_r = 2 * (cohort.p() + 1);
    if let Some(r) = a.r.0.iter().find(|&&r| r < min_r) {
        return Err(usage(format!("--r {r} is below 2(p+1) = {min_r}")));
    }
    let full = full_fit(&cohort, a.level)?;
    let mut cells = Vec::new();
    for method in a.method.methods() {
        for &r in &a.r.0 {
            let cell = analysis_cell(&cohort, &full, method, r, a.b, a.seed, a.variance);
            for w in &cell.warnings {
                eprintln!("warning: {method} r={r}: {w}");
            }
            cells.push(cell);
        }
    }
    if cells.iter().all(|c| c.replicates == 0) {
        return Err(Failure::Runtime(CoxError::Invalid(
            "every subsample replicate failed".into(),
        )));
    }
    let report = AnalysisReport { full, cells };
    create_dir(&a.out)?;
    write_analysis_csv(&report, create_file(&a.out.join("analysis.csv"))?)?;
    write_json(&a.out.join("analysis.json"), &report)?;
    let failures: usize = report.cells.iter().map(|c| c.failures).sum();
    write_manifest(
        &a.out,
        "analyze",
        a,
        serde_json::json!({ "schema": schema, "n": report.full.n, "failures": failures }),
    )
}

fn cmd_generate(a: &GenerateArgs) -> CliResult<()> {
    let config = scenario_base(&a.scenario, a.seed)?;
    if config.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let cal = calibrate_censoring(&BETA0, config.baseline, config.target_censoring)?;
    let mut rng = substream(a.seed, &[label::COHORT]);
    let cohort = gen_cohort(config.n, &config.beta0, config.baseline, cal.c, &mut rng)?;
    create_dir(&a.out)?;
    save_csv(&cohort, a.out.join("cohort.csv"))?;
    let realized = 1.0 - cohort.event_count() as f64 / cohort.len() as f64;
    write_manifest(
        &a.out,
        "generate",
        a,
        serde_json::json!({
            "n": config.n,
            "beta0": config.beta0,
            "baseline": config.baseline,
            "target_censoring": config.target_censoring,
            "calibrated_c": cal.c,
            "realized_censoring": realized,
        }),
    )
}
