//! Subsampling probabilities, with-replacement draws and the pilot stage.
//!
//! Optimal probabilities minimize the trace of the subsample estimator's
//! asymptotic covariance. They are stratified by censoring status so that
//! censored records carry total mass `1 − δ̄` and events carry `δ̄`:
//!
//! * censored `i`: `π_i ∝ ‖q_i‖`
//! * event `i`: `π_i ∝ sqrt(‖Z_i − Z̄(β, X_i)‖² + ‖q_i‖²)`
//!
//! where `q_i` is the record's accumulated risk-set influence on the score.

use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::cox::{rows_risk_sums, sorted_predictors};
use crate::data::SortedCohort;
use crate::error::{CoxError, Result};
use crate::rng::{label, split, CoxRng};
use crate::weighted::{weighted_newton, WeightedFit};

/// Per-record score influence vectors `q_i(β)` in original record order.
#[derive(Debug, Clone, PartialEq)]
pub struct QScores {
    pub p: usize,
    /// `N × p`, row-major.
    pub q: Vec<f64>,
    pub norms: Vec<f64>,
}

impl QScores {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.p..(i + 1) * self.p]
    }
}

/// Extra per-record quantities needed by the optimal probabilities.
struct Influence {
    q: QScores,
    /// `‖Z_i − Z̄(β, X_i)‖` for events, 0 for censored records.
    event_norms: Vec<f64>,
}

fn influence(cohort: &SortedCohort, beta: &[f64]) -> Result<Influence> {
    if cohort.event_count() == 0 {
        return Err(CoxError::ZeroEvents);
    }
    let rows = cohort.rows();
    let (eta, shift) = sorted_predictors(rows, beta)?;
    let sums = rows_risk_sums(rows, &eta, shift, false)?;
    let grid = rows.grid();
    let p = rows.p();
    let n = rows.len();
    let inv_n = 1.0 / n as f64;

    // Prefix sums over event times of dN̄_k / S0_k and dN̄_k Z̄_k / S0_k,
    // with S0 on the shifted scale (the matching exp(η_i − shift) factor
    // is applied per record).
    let k_len = grid.len();
    let mut a = vec![0.0; k_len];
    let mut b = vec![0.0; k_len * p];
    let mut acc_a = 0.0;
    let mut acc_b = vec![0.0; p];
    for k in 0..k_len {
        let jump = grid.counts[k] as f64 * inv_n / sums.s0[k];
        acc_a += jump;
        let s1 = sums.s1(k);
        for d in 0..p {
            acc_b[d] += jump * s1[d] / sums.s0[k];
        }
        a[k] = acc_a;
        b[k * p..(k + 1) * p].copy_from_slice(&acc_b);
    }

    let mut q = vec![0.0; n * p];
    let mut norms = vec![0.0; n];
    let mut event_norms = vec![0.0; n];
    let order = cohort.order();
    let mut m = 0; // number of event times <= current time
    for pos in 0..n {
        let t = rows.times()[pos];
        while m < k_len && grid.times[m] <= t {
            m += 1;
        }
        let i = order[pos];
        let z = rows.z(pos);
        if m > 0 {
            let e = (eta[pos] - shift).exp();
            let row = &mut q[i * p..(i + 1) * p];
            let bk = &b[(m - 1) * p..m * p];
            for d in 0..p {
                row[d] = e * (z[d] * a[m - 1] - bk[d]);
            }
            norms[i] = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        if rows.status()[pos] {
            // own event time is the last one <= t
            let k = m - 1;
            let s1 = sums.s1(k);
            event_norms[i] = (0..p)
                .map(|d| {
                    let diff = z[d] - s1[d] / sums.s0[k];
                    diff * diff
                })
                .sum::<f64>()
                .sqrt();
        }
    }
    Ok(Influence {
        q: QScores { p, q, norms },
        event_norms,
    })
}

/// `q_i(β) = Σ_{t_k ≤ X_i} {Z_i − Z̄(β,t_k)} exp(βᵀZ_i) / S^(0)(β,t_k) · d_k/N`.
pub fn q_scores(cohort: &SortedCohort, beta: &[f64]) -> Result<QScores> {
    Ok(influence(cohort, beta)?.q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Uniform,
    CenOpt,
    FullOpt,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Uniform, Method::FullOpt, Method::CenOpt];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Uniform => "uniform",
            Method::CenOpt => "cenopt",
            Method::FullOpt => "fullopt",
        }
    }

    pub fn index(&self) -> u64 {
        match self {
            Method::Uniform => 0,
            Method::CenOpt => 1,
            Method::FullOpt => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = CoxError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "uniform" => Ok(Method::Uniform),
            "cenopt" => Ok(Method::CenOpt),
            "fullopt" => Ok(Method::FullOpt),
            _ => Err(CoxError::Invalid(format!("unknown method {s:?}"))),
        }
    }
}

/// Probabilities over the cohort plus the stratum layout used when drawing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsamplingPlan {
    pub method: Method,
    pub probs: Vec<f64>,
    /// Draw events and censored records separately in proportion `δ̄ : 1 − δ̄`.
    pub stratified: bool,
    pub event_rate: f64,
    #[serde(skip)]
    pub s0: Vec<usize>,
    #[serde(skip)]
    pub s1: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SubsamplingPlan {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn stratum_mass(&self) -> (f64, f64) {
        let m0 = self.s0.iter().map(|&i| self.probs[i]).sum();
        let m1 = self.s1.iter().map(|&i| self.probs[i]).sum();
        (m0, m1)
    }
}

pub fn uniform_probs(cohort: &SortedCohort) -> SubsamplingPlan {
    let n = cohort.len();
    SubsamplingPlan {
        method: Method::Uniform,
        probs: vec![1.0 / n as f64; n],
        stratified: false,
        event_rate: cohort.event_rate(),
        s0: cohort.s0_index().to_vec(),
        s1: cohort.s1_index().to_vec(),
        warnings: Vec::new(),
    }
}

/// Spread `mass` over `idx` proportionally to `scores`.
fn fill_stratum(probs: &mut [f64], idx: &[usize], scores: impl Fn(usize) -> f64, mass: f64) -> f64 {
    let total: f64 = idx.iter().map(|&i| scores(i)).sum();
    if total > 0.0 {
        for &i in idx {
            probs[i] = mass * scores(i) / total;
        }
    }
    total
}

fn optimal_plan(cohort: &SortedCohort, beta: &[f64], method: Method) -> Result<SubsamplingPlan> {
    let n = cohort.len();
    let s0 = cohort.s0_index();
    let s1 = cohort.s1_index();
    let inf = influence(cohort, beta)?;
    let mut warnings = Vec::new();
    // an empty stratum hands its mass to the other one
    let (mass0, mass1) = match (s0.is_empty(), s1.is_empty()) {
        (true, _) => {
            warnings.push("censored stratum is empty; all mass assigned to events".to_string());
            (0.0, 1.0)
        }
        (_, true) => {
            warnings
                .push("event stratum is empty; all mass assigned to censored records".to_string());
            (1.0, 0.0)
        }
        _ => (cohort.censoring_rate(), cohort.event_rate()),
    };
    for w in &warnings {
        warn!("{method}: {w}");
    }
    let mut probs = vec![0.0; n];
    if !s0.is_empty() {
        let total = fill_stratum(&mut probs, s0, |i| inf.q.norms[i], mass0);
        if total <= 0.0 || !total.is_finite() {
            return Err(CoxError::DegenerateCensoredStratum);
        }
    }
    if !s1.is_empty() {
        match method {
            Method::FullOpt => {
                let total = fill_stratum(
                    &mut probs,
                    s1,
                    |i| inf.event_norms[i].hypot(inf.q.norms[i]),
                    mass1,
                );
                if total <= 0.0 || !total.is_finite() {
                    // every event sits exactly at its risk-set mean: fall back to uniform
                    warnings.push("event stratum scores are all zero; using uniform events".into());
                    fill_stratum(&mut probs, s1, |_| 1.0, mass1);
                }
            }
            _ => {
                fill_stratum(&mut probs, s1, |_| 1.0, mass1);
            }
        }
    }
    Ok(SubsamplingPlan {
        method,
        probs,
        stratified: true,
        event_rate: mass1,
        s0: s0.to_vec(),
        s1: s1.to_vec(),
        warnings,
    })
}

/// Optimal probabilities on both strata.
pub fn fullopt_probs(cohort: &SortedCohort, beta_pilot: &[f64]) -> Result<SubsamplingPlan> {
    optimal_plan(cohort, beta_pilot, Method::FullOpt)
}

/// Optimal probabilities on censored records, uniform `1/N` on events.
pub fn cenopt_probs(cohort: &SortedCohort, beta_pilot: &[f64]) -> Result<SubsamplingPlan> {
    optimal_plan(cohort, beta_pilot, Method::CenOpt)
}

pub fn plan_for(
    cohort: &SortedCohort,
    method: Method,
    beta_pilot: &[f64],
) -> Result<SubsamplingPlan> {
    match method {
        Method::Uniform => Ok(uniform_probs(cohort)),
        Method::CenOpt => cenopt_probs(cohort, beta_pilot),
        Method::FullOpt => fullopt_probs(cohort, beta_pilot),
    }
}

/// A with-replacement draw: source indices and their probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subsample {
    pub indices: Vec<usize>,
    pub probs_at_draw: Vec<f64>,
    pub r: usize,
    pub source_n: usize,
}

impl Subsample {
    /// Each record once with `π = 1/N`; the weighted estimators then reduce
    /// to their full-data counterparts.
    pub fn identity(n: usize) -> Self {
        Subsample {
            indices: (0..n).collect(),
            probs_at_draw: vec![1.0 / n as f64; n],
            r: n,
            source_n: n,
        }
    }
}

/// `round(r·δ̄)` with halves rounded up.
pub fn event_draw_count(r: usize, event_rate: f64) -> usize {
    ((r as f64 * event_rate + 0.5).floor() as usize).min(r)
}

fn draw_from(
    idx: &[usize],
    probs: &[f64],
    count: usize,
    rng: &mut CoxRng,
    out: &mut Vec<usize>,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    if idx.is_empty() {
        return Err(CoxError::Invalid(
            "cannot draw from an empty stratum".into(),
        ));
    }
    let first = probs[idx[0]];
    if idx.iter().all(|&i| probs[i] == first) {
        out.extend((0..count).map(|_| idx[rng.random_range(0..idx.len())]));
        return Ok(());
    }
    let weights: Vec<f64> = idx.iter().map(|&i| probs[i]).collect();
    let alias = WeightedAliasIndex::new(weights)
        .map_err(|e| CoxError::Invalid(format!("invalid sampling weights: {e}")))?;
    out.extend((0..count).map(|_| idx[alias.sample(rng)]));
    Ok(())
}

/// Draw `r` records with replacement according to `plan`.
///
/// Stratified plans take `round(r·δ̄)` draws from the event-conditional
/// distribution and the rest from the censored-conditional distribution.
pub fn draw_subsample(plan: &SubsamplingPlan, r: usize, rng: &mut CoxRng) -> Result<Subsample> {
    if r == 0 {
        return Err(CoxError::Invalid(
            "subsample size r must be at least 1".into(),
        ));
    }
    let n = plan.probs.len();
    let mut indices = Vec::with_capacity(r);
    if plan.stratified {
        let n1 = event_draw_count(r, plan.event_rate);
        draw_from(&plan.s1, &plan.probs, n1, rng, &mut indices)?;
        draw_from(&plan.s0, &plan.probs, r - n1, rng, &mut indices)?;
    } else {
        let all: Vec<usize> = (0..n).collect();
        draw_from(&all, &plan.probs, r, rng, &mut indices)?;
    }
    let probs_at_draw: Vec<f64> = indices.iter().map(|&i| plan.probs[i]).collect();
    debug_assert!(probs_at_draw.iter().all(|&p| p > 0.0));
    Ok(Subsample {
        indices,
        probs_at_draw,
        r,
        source_n: n,
    })
}

pub const PILOT_ATTEMPTS: usize = 5;

/// Uniform pilot stratified by censoring status, weighted with `π = 1/N`,
/// and its weighted estimate from `β = 0`. Each attempt uses a fresh
/// substream of `rng`.
pub fn pilot_stage(
    cohort: &SortedCohort,
    r: usize,
    rng: &mut CoxRng,
) -> Result<(WeightedFit, Subsample)> {
    let p = cohort.p();
    if r < 2 * (p + 1) {
        return Err(CoxError::Invalid(format!(
            "pilot size r = {r} is below 2(p+1) = {}",
            2 * (p + 1)
        )));
    }
    if cohort.s1_index().is_empty() {
        return Err(CoxError::ZeroEvents);
    }
    let n = cohort.len();
    let plan = SubsamplingPlan {
        method: Method::Uniform,
        probs: vec![1.0 / n as f64; n],
        stratified: true,
        event_rate: cohort.event_rate(),
        s0: cohort.s0_index().to_vec(),
        s1: cohort.s1_index().to_vec(),
        warnings: Vec::new(),
    };
    let opts = crate::cox::SolverOptions::default();
    let zero = vec![0.0; p];
    let mut last = None;
    for attempt in 0..PILOT_ATTEMPTS {
        let mut sub_rng = split(rng, &[label::PILOT, attempt as u64]);
        let sub = draw_subsample(&plan, r, &mut sub_rng)?;
        match weighted_newton(&sub, cohort, &zero, &opts) {
            Ok(fit) => return Ok((fit, sub)),
            Err(e) => last = Some(e),
        }
    }
    Err(CoxError::PilotFailed {
        attempts: PILOT_ATTEMPTS,
        last: Box::new(last.expect("at least one attempt")),
    })
}
