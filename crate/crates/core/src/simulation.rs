//! Monte Carlo study: synthetic Cox data with six covariates, censoring
//! calibration, replicated subsampling runs and their summary metrics.

use std::io::Write;

use log::warn;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Cohort, SortedCohort};
use crate::error::{CoxError, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::rng::{label, substream, CoxRng};
use crate::stats::{mean, normal_quantile, sample_sd};
use crate::subsampling::Method;
use crate::weighted::{run_algorithm1_with, Algorithm1Options, VarianceKind};

pub const P: usize = 6;
pub const BETA0: [f64; P] = [0.5, 1.0, -0.3, -0.7, 0.4, 0.6];
pub const CALIBRATION_SEED: u64 = 20_220_101;
pub const CALIBRATION_DRAWS: usize = 1_000_000;
pub const CALIBRATION_TOL: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Baseline {
    /// `λ0(t) = rate`.
    Constant(f64),
    /// `λ0(t) = t`.
    Linear,
}

impl Baseline {
    pub fn cumulative(&self, t: f64) -> f64 {
        match self {
            Baseline::Constant(rate) => rate * t,
            Baseline::Linear => 0.5 * t * t,
        }
    }

    /// Solve `Λ0(T) exp(βᵀZ) = E` for `T`, with `E` a unit exponential.
    pub fn invert(&self, e: f64, eta: f64) -> f64 {
        let target = e * (-eta).exp();
        match self {
            Baseline::Constant(rate) => target / rate,
            Baseline::Linear => (2.0 * target).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub n: usize,
    pub beta0: Vec<f64>,
    pub baseline: Baseline,
    pub target_censoring: f64,
    pub r_grid: Vec<usize>,
    pub b: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub level: f64,
    #[serde(default)]
    pub variance: VarianceKind,
}

impl ScenarioConfig {
    /// One of the four standard settings: `λ0 ∈ {0.5, t}` × censoring `{30%, 50%}`.
    pub fn case(case: u8, master_seed: u64) -> Result<Self> {
        let (baseline, cens) = match case {
            1 => (Baseline::Constant(0.5), 0.30),
            2 => (Baseline::Constant(0.5), 0.50),
            3 => (Baseline::Linear, 0.30),
            4 => (Baseline::Linear, 0.50),
            _ => {
                return Err(CoxError::Invalid(format!(
                    "unknown case {case}; expected 1-4"
                )))
            }
        };
        Ok(ScenarioConfig {
            name: format!("case{case}"),
            n: 20_000,
            beta0: BETA0.to_vec(),
            baseline,
            target_censoring: cens,
            r_grid: vec![100, 200, 300, 400, 500],
            b: 1000,
            methods: Method::ALL.to_vec(),
            master_seed,
            level: 0.95,
            variance: VarianceKind::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta0.len() != P {
            return Err(CoxError::Dimension {
                expected: P,
                got: self.beta0.len(),
            });
        }
        if self.b == 0 {
            return Err(CoxError::Invalid("b must be at least 1".into()));
        }
        if self.r_grid.is_empty() || self.methods.is_empty() {
            return Err(CoxError::Invalid(
                "need at least one r and one method".into(),
            ));
        }
        let r_max = *self.r_grid.iter().max().expect("nonempty");
        if self.n < 10 * r_max {
            return Err(CoxError::Invalid(format!(
                "n = {} must be at least 10·max(r) = {}",
                self.n,
                10 * r_max
            )));
        }
        if !(self.target_censoring > 0.0 && self.target_censoring < 1.0) {
            return Err(CoxError::Invalid(
                "target censoring must lie in (0, 1)".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CoxError::Invalid("level must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

fn sigma0_factor() -> Matrix {
    let mut s = Matrix::zeros(3);
    for i in 0..3 {
        for j in 0..3 {
            s[(i, j)] = 0.5f64.powi((i as i32 - j as i32).abs());
        }
    }
    Cholesky::new(&s)
        .expect("Σ0 is positive definite")
        .factor()
        .clone()
}

fn fill_covariates(l: &Matrix, rng: &mut CoxRng, row: &mut [f64]) {
    let e: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    for i in 0..3 {
        row[i] = (0..=i).map(|k| l[(i, k)] * e[k]).sum();
    }
    let g1: f64 = Exp1.sample(rng);
    let g2: f64 = Exp1.sample(rng);
    row[3] = g1 + g2;
    row[4] = f64::from(rng.random::<f64>() < 0.5);
    row[5] = f64::from(rng.random::<f64>() < 0.3);
}

/// `n × 6` row-major: trivariate normal with `Σ0 = (0.5^{|i−j|})`,
/// Gamma(2, 1), Bernoulli(0.5), Bernoulli(0.3).
pub fn gen_covariates(n: usize, rng: &mut CoxRng) -> Vec<f64> {
    let l = sigma0_factor();
    let mut z = vec![0.0; n * P];
    for row in z.chunks_exact_mut(P) {
        fill_covariates(&l, rng, row);
    }
    z
}

/// Inverse-transform event times for `Λ0(T) exp(β0ᵀZ) = −log U`.
pub fn gen_event_times(z: &[f64], beta0: &[f64], baseline: Baseline, rng: &mut CoxRng) -> Vec<f64> {
    let p = beta0.len();
    z.chunks_exact(p)
        .map(|row| {
            let e: f64 = Exp1.sample(rng);
            baseline.invert(e, dot(row, beta0))
        })
        .collect()
}

/// Cohort with censoring `C ~ U(0, c)`.
pub fn gen_cohort(
    n: usize,
    beta0: &[f64],
    baseline: Baseline,
    c: f64,
    rng: &mut CoxRng,
) -> Result<Cohort> {
    let z = gen_covariates(n, rng);
    let t = gen_event_times(&z, beta0, baseline, rng);
    let mut times = Vec::with_capacity(n);
    let mut status = Vec::with_capacity(n);
    for &ti in &t {
        let ci = c * rng.random::<f64>();
        times.push(ti.min(ci));
        status.push(ti <= ci);
    }
    Cohort::new(P, times, status, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c: f64,
    pub achieved: f64,
}

/// Common random numbers for censoring calibration: event times and
/// uniform censoring multipliers, so the estimated rate is monotone in `c`.
struct CalibrationDraws {
    t: Vec<f64>,
    u: Vec<f64>,
}

impl CalibrationDraws {
    fn new(beta0: &[f64], baseline: Baseline, draws: usize) -> Self {
        let mut rng = substream(CALIBRATION_SEED, &[label::CALIBRATION]);
        let l = sigma0_factor();
        let mut row = [0.0; P];
        let mut t = Vec::with_capacity(draws);
        let mut u = Vec::with_capacity(draws);
        for _ in 0..draws {
            fill_covariates(&l, &mut rng, &mut row);
            let e: f64 = Exp1.sample(&mut rng);
            t.push(baseline.invert(e, dot(&row, beta0)));
            u.push(rng.random::<f64>());
        }
        CalibrationDraws { t, u }
    }

    fn rate(&self, c: f64) -> f64 {
        let censored = self
            .t
            .iter()
            .zip(&self.u)
            .filter(|(t, u)| **t > c * **u)
            .count();
        censored as f64 / self.t.len() as f64
    }
}

/// Monte Carlo estimate of `P(T > C)` for `C ~ U(0, c)`, using the fixed
/// calibration stream.
pub fn censoring_rate_at(beta0: &[f64], baseline: Baseline, c: f64, draws: usize) -> f64 {
    CalibrationDraws::new(beta0, baseline, draws).rate(c)
}

/// Find `c` such that `C ~ U(0, c)` censors a `target` fraction, by bisection
/// in `log c` over `[1e-6, 1e6]`.
pub fn calibrate_censoring(beta0: &[f64], baseline: Baseline, target: f64) -> Result<Calibration> {
    calibrate_with(beta0, baseline, target, CALIBRATION_DRAWS)
}

pub fn calibrate_with(
    beta0: &[f64],
    baseline: Baseline,
    target: f64,
    draws: usize,
) -> Result<Calibration> {
    if !(target > 0.0 && target < 1.0) {
        return Err(CoxError::Invalid(format!(
            "target censoring {target} must lie in (0, 1)"
        )));
    }
    let mc = CalibrationDraws::new(beta0, baseline, draws);
    let (mut lo, mut hi) = (1e-6f64.ln(), 1e6f64.ln());
    let (r_lo, r_hi) = (mc.rate(lo.exp()), mc.rate(hi.exp()));
    if r_lo < target || r_hi > target {
        return Err(CoxError::Invalid(format!(
            "censoring target {target} not bracketed by c in [1e-6, 1e6] (rates {r_lo}, {r_hi})"
        )));
    }
    let mut best = Calibration {
        c: hi.exp(),
        achieved: r_hi,
    };
    // bisect to a narrow bracket; keep the closest evaluated c
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let c = mid.exp();
        let rate = mc.rate(c);
        if (rate - target).abs() < (best.achieved - target).abs() {
            best = Calibration { c, achieved: rate };
        }
        // rate decreases in c
        if rate > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (best.achieved - target).abs() > CALIBRATION_TOL {
        return Err(CoxError::Invalid(format!(
            "calibration stalled at rate {} for target {target}",
            best.achieved
        )));
    }
    Ok(best)
}

/// One estimate from one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateEstimate {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordMetrics {
    pub coord: usize,
    pub bias: f64,
    /// `None` when fewer than two replicates succeeded.
    pub sse: Option<f64>,
    pub ese: f64,
    pub cp: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub coords: Vec<CoordMetrics>,
    /// `(1/B) Σ_b ‖β̃^(b) − β_ref‖²`.
    pub mse: f64,
    /// Monte Carlo standard error of `mse`.
    pub mse_se: Option<f64>,
    pub replicates: usize,
}

/// Bias, SSE, ESE, coverage and cumulative MSE against `reference`.
pub fn compute_metrics(
    reps: &[ReplicateEstimate],
    reference: &[f64],
    level: f64,
) -> Result<CellMetrics> {
    if reps.is_empty() {
        return Err(CoxError::Invalid("no successful replicates".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(CoxError::Invalid(format!(
            "level {level} must lie in (0, 1)"
        )));
    }
    let z = normal_quantile(0.5 * (1.0 + level));
    let b = reps.len() as f64;
    let coords = (0..reference.len())
        .map(|j| {
            let est: Vec<f64> = reps.iter().map(|r| r.beta[j]).collect();
            let m = mean(&est);
            let covered = reps
                .iter()
                .filter(|r| (r.beta[j] - reference[j]).abs() <= z * r.se[j])
                .count();
            CoordMetrics {
                coord: j + 1,
                bias: m - reference[j],
                sse: sample_sd(&est),
                ese: reps.iter().map(|r| r.se[j]).sum::<f64>() / b,
                cp: covered as f64 / b,
                mean: m,
            }
        })
        .collect();
    let sq: Vec<f64> = reps
        .iter()
        .map(|r| {
            r.beta
                .iter()
                .zip(reference)
                .map(|(x, y)| (x - y).powi(2))
                .sum()
        })
        .collect();
    Ok(CellMetrics {
        coords,
        mse: mean(&sq),
        mse_se: crate::stats::mean_se(&sq),
        replicates: reps.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: Method,
    pub r: usize,
    pub metrics: Option<CellMetrics>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub case: String,
    pub cells: Vec<CellResult>,
}

impl MetricsTable {
    pub fn cell(&self, method: Method, r: usize) -> Option<&CellMetrics> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.r == r)
            .and_then(|c| c.metrics.as_ref())
    }

    /// `MSE(Uniform) / MSE(FullOpt)` at `r`.
    pub fn relative_efficiency(&self, r: usize) -> Option<f64> {
        Some(self.cell(Method::Uniform, r)?.mse / self.cell(Method::FullOpt, r)?.mse)
    }

    pub fn r_values(&self) -> Vec<usize> {
        let mut rs: Vec<usize> = self.cells.iter().map(|c| c.r).collect();
        rs.sort_unstable();
        rs.dedup();
        rs
    }

    /// Tidy per-coordinate CSV: `case,method,r,coord,bias,sse,ese,cp`.
    pub fn write_coords_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["case", "method", "r", "coord", "bias", "sse", "ese", "cp"])?;
        for cell in &self.cells {
            let Some(m) = &cell.metrics else { continue };
            for c in &m.coords {
                w.write_record([
                    self.case.clone(),
                    cell.method.to_string(),
                    cell.r.to_string(),
                    format!("beta{}", c.coord),
                    c.bias.to_string(),
                    c.sse.map(|x| x.to_string()).unwrap_or_default(),
                    c.ese.to_string(),
                    c.cp.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| CoxError::io("<csv writer>", e))?;
        Ok(())
    }

    /// Per-cell CSV: `case,method,r,mse,mse_se,replicates,failures,relative_efficiency`.
    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "case",
            "method",
            "r",
            "mse",
            "mse_se",
            "replicates",
            "failures",
            "relative_efficiency",
        ])?;
        for cell in &self.cells {
            let (mse, se, reps) = match &cell.metrics {
                Some(m) => (
                    m.mse.to_string(),
                    m.mse_se.map(|x| x.to_string()).unwrap_or_default(),
                    m.replicates.to_string(),
                ),
                None => (String::new(), String::new(), "0".into()),
            };
            let re = self
                .relative_efficiency(cell.r)
                .map(|x| x.to_string())
                .unwrap_or_default();
            w.write_record([
                self.case.clone(),
                cell.method.to_string(),
                cell.r.to_string(),
                mse,
                se,
                reps,
                cell.failures.to_string(),
                re,
            ])?;
        }
        w.flush().map_err(|e| CoxError::io("<csv writer>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub calibration: Calibration,
    /// Mean realized censoring rate over the generated cohorts.
    pub realized_censoring: f64,
    pub table: MetricsTable,
    pub total_failures: usize,
    pub warnings: Vec<String>,
}

/// Estimates of one replicate, indexed like `cells(config)`.
type ReplicateRow = (f64, Vec<Option<ReplicateEstimate>>);

fn cells(config: &ScenarioConfig) -> Vec<(Method, usize)> {
    config
        .methods
        .iter()
        .flat_map(|&m| config.r_grid.iter().map(move |&r| (m, r)))
        .collect()
}

fn run_replicate(config: &ScenarioConfig, c: f64, b: usize) -> Result<ReplicateRow> {
    let mut rng = substream(
        config.master_seed,
        &[label::REPLICATE, b as u64, label::COHORT],
    );
    let cohort = SortedCohort::new(gen_cohort(
        config.n,
        &config.beta0,
        config.baseline,
        c,
        &mut rng,
    )?);
    let opts = Algorithm1Options {
        lambda_variance: false,
        variance: config.variance,
        ..Default::default()
    };
    let est = cells(config)
        .into_iter()
        .map(|(method, r)| {
            let mut rng = substream(
                config.master_seed,
                &[label::REPLICATE, b as u64, method.index(), r as u64],
            );
            run_algorithm1_with(&cohort, r, method, &mut rng, &opts)
                .ok()
                .filter(|out| out.fit.converged && out.fit.se().iter().all(|s| s.is_finite()))
                .map(|out| ReplicateEstimate {
                    se: out.fit.se(),
                    beta: out.fit.beta,
                })
        })
        .collect();
    Ok((cohort.censoring_rate(), est))
}

/// Run every replicate (in parallel on the current rayon pool) and aggregate
/// in replicate order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    config.validate()?;
    let calibration = calibrate_censoring(&config.beta0, config.baseline, config.target_censoring)?;
    run_scenario_calibrated(config, calibration)
}

pub fn run_scenario_calibrated(
    config: &ScenarioConfig,
    calibration: Calibration,
) -> Result<ScenarioResult> {
    config.validate()?;
    let rows: Vec<ReplicateRow> = (0..config.b)
        .into_par_iter()
        .map(|b| run_replicate(config, calibration.c, b))
        .collect::<Result<_>>()?;
    let realized_censoring = rows.iter().map(|(c, _)| c).sum::<f64>() / rows.len() as f64;
    let mut warnings = Vec::new();
    let mut total_failures = 0;
    let mut out_cells = Vec::new();
    for (j, (method, r)) in cells(config).into_iter().enumerate() {
        let ok: Vec<ReplicateEstimate> = rows.iter().filter_map(|(_, e)| e[j].clone()).collect();
        let failures = config.b - ok.len();
        total_failures += failures;
        if failures as f64 > 0.02 * config.b as f64 {
            let msg = format!(
                "{}: {method} r={r}: {failures} of {} replicates failed",
                config.name, config.b
            );
            warn!("{msg}");
            warnings.push(msg);
        }
        let metrics = if ok.is_empty() {
            None
        } else {
            Some(compute_metrics(&ok, &config.beta0, config.level)?)
        };
        out_cells.push(CellResult {
            method,
            r,
            metrics,
            failures,
        });
    }
    Ok(ScenarioResult {
        config: config.clone(),
        calibration,
        realized_censoring,
        table: MetricsTable {
            case: config.name.clone(),
            cells: out_cells,
        },
        total_failures,
        warnings,
    })
}
