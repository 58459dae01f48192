//! Cox partial-likelihood machinery over time-sorted rows.
//!
//! Everything here is computed by one reverse pass over the sorted rows
//! (suffix sums), so a full evaluation costs `O(N p²)`. The same routines
//! serve the full cohort (unit weights, normalizer `1/N`) and weighted
//! subsamples (weights `1/π*`, normalizer `1/(N r)`).

use serde::{Deserialize, Serialize};

use crate::data::{SortedCohort, SortedRows};
use crate::error::{CoxError, Result};
use crate::linalg::{dot, max_abs, Cholesky, Matrix};

/// `S^(0)`, `S^(1)`, `S^(2)` at each distinct event time.
///
/// Exponentials are taken relative to `shift` (the largest linear predictor),
/// so the true `S^(k)` is the stored value times `exp(shift)`. All ratios
/// (`Z̄`, `S2/S0`) are unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSetSums {
    pub p: usize,
    pub shift: f64,
    pub s0: Vec<f64>,
    /// `K × p`, row-major.
    pub s1: Vec<f64>,
    /// `K × p × p`; empty when second moments were not requested.
    pub s2: Vec<f64>,
}

impl RiskSetSums {
    pub fn len(&self) -> usize {
        self.s0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s0.is_empty()
    }

    pub fn s1(&self, k: usize) -> &[f64] {
        &self.s1[k * self.p..(k + 1) * self.p]
    }

    pub fn s2(&self, k: usize) -> &[f64] {
        let pp = self.p * self.p;
        &self.s2[k * pp..(k + 1) * pp]
    }

    /// `Z̄(β, t_k) = S^(1)/S^(0)`.
    pub fn zbar(&self, k: usize) -> Vec<f64> {
        self.s1(k).iter().map(|x| x / self.s0[k]).collect()
    }

    /// `S^(0)` on its natural scale (may overflow for extreme predictors).
    pub fn s0_unshifted(&self, k: usize) -> f64 {
        self.s0[k] * self.shift.exp()
    }
}

/// Linear predictors in sorted-row order, plus their maximum.
pub(crate) fn sorted_predictors(rows: &SortedRows, beta: &[f64]) -> Result<(Vec<f64>, f64)> {
    if beta.len() != rows.p() {
        return Err(CoxError::Dimension {
            expected: rows.p(),
            got: beta.len(),
        });
    }
    let eta: Vec<f64> = (0..rows.len()).map(|i| dot(rows.z(i), beta)).collect();
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() || eta.iter().any(|x| !x.is_finite()) {
        return Err(CoxError::NonFinite("linear predictor"));
    }
    Ok((eta, max))
}

/// `η_i = βᵀZ_i` in the cohort's original record order, and `max_i η_i`.
pub fn linear_predictors(cohort: &SortedCohort, beta: &[f64]) -> Result<(Vec<f64>, f64)> {
    let base = cohort.base();
    if beta.len() != base.p() {
        return Err(CoxError::Dimension {
            expected: base.p(),
            got: beta.len(),
        });
    }
    let eta: Vec<f64> = (0..base.len()).map(|i| dot(base.z(i), beta)).collect();
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if eta.iter().any(|x| !x.is_finite()) {
        return Err(CoxError::NonFinite("linear predictor"));
    }
    Ok((eta, max))
}

pub(crate) fn rows_risk_sums(
    rows: &SortedRows,
    eta: &[f64],
    shift: f64,
    second: bool,
) -> Result<RiskSetSums> {
    let p = rows.p();
    let grid = rows.grid();
    let k_len = grid.len();
    let mut s0 = vec![0.0; k_len];
    let mut s1 = vec![0.0; k_len * p];
    let mut s2 = if second {
        vec![0.0; k_len * p * p]
    } else {
        Vec::new()
    };

    let mut acc0 = 0.0;
    let mut acc1 = vec![0.0; p];
    let mut acc2 = if second { vec![0.0; p * p] } else { Vec::new() };
    let mut pos = rows.len();
    for k in (0..k_len).rev() {
        let start = grid.risk_start[k];
        while pos > start {
            pos -= 1;
            let e = rows.weight(pos) * (eta[pos] - shift).exp();
            let z = rows.z(pos);
            acc0 += e;
            for a in 0..p {
                let ez = e * z[a];
                acc1[a] += ez;
                if second {
                    for b in 0..p {
                        acc2[a * p + b] += ez * z[b];
                    }
                }
            }
        }
        if acc0 <= 0.0 {
            return Err(CoxError::EmptyRiskSet(grid.times[k]));
        }
        let norm = rows.norm();
        s0[k] = norm * acc0;
        for a in 0..p {
            s1[k * p + a] = norm * acc1[a];
        }
        if second {
            for ab in 0..p * p {
                s2[k * p * p + ab] = norm * acc2[ab];
            }
        }
    }
    Ok(RiskSetSums {
        p,
        shift,
        s0,
        s1,
        s2,
    })
}

/// Risk-set sums for the full cohort at `beta`.
pub fn risk_set_sums(cohort: &SortedCohort, beta: &[f64]) -> Result<RiskSetSums> {
    if cohort.event_count() == 0 {
        return Err(CoxError::ZeroEvents);
    }
    let rows = cohort.rows();
    let (eta, shift) = sorted_predictors(rows, beta)?;
    rows_risk_sums(rows, &eta, shift, true)
}

/// Log partial likelihood, score and (optionally) the information matrix
/// `H = -∂U/∂βᵀ` at one coefficient vector.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub loglik: f64,
    pub score: Vec<f64>,
    pub hessian: Option<Matrix>,
}

pub(crate) fn rows_evaluate(rows: &SortedRows, beta: &[f64], second: bool) -> Result<Evaluation> {
    let p = rows.p();
    if rows.grid().is_empty() {
        return Err(CoxError::ZeroEvents);
    }
    let (eta, shift) = sorted_predictors(rows, beta)?;
    let sums = rows_risk_sums(rows, &eta, shift, second)?;
    let grid = rows.grid();
    let norm = rows.norm();

    let mut loglik = 0.0;
    let mut score = vec![0.0; p];
    let mut hessian = second.then(|| Matrix::zeros(p));
    for k in 0..grid.len() {
        let s0 = sums.s0[k];
        let zbar = sums.zbar(k);
        // log Σ_j w_j Y_j exp(η_j), on the natural scale
        let log_denom = (s0 / norm).ln() + shift;
        let start = grid.risk_start[k];
        let mut wsum = 0.0;
        for pos in start..start + grid.counts[k] {
            let w = rows.weight(pos);
            wsum += w;
            loglik += w * (eta[pos] - log_denom);
            let z = rows.z(pos);
            for a in 0..p {
                score[a] += w * (z[a] - zbar[a]);
            }
        }
        if let Some(h) = hessian.as_mut() {
            let s2 = sums.s2(k);
            for a in 0..p {
                for b in 0..p {
                    h[(a, b)] += wsum * (s2[a * p + b] / s0 - zbar[a] * zbar[b]);
                }
            }
        }
    }
    loglik *= norm;
    score.iter_mut().for_each(|x| *x *= norm);
    if let Some(h) = hessian.as_mut() {
        h.scale(norm);
        h.symmetrize();
    }
    if !loglik.is_finite() || score.iter().any(|x| !x.is_finite()) {
        return Err(CoxError::NonFinite("partial likelihood"));
    }
    Ok(Evaluation {
        loglik,
        score,
        hessian,
    })
}

/// `ℓ(β) = (1/N) Σ_i δ_i [βᵀZ_i − log Σ_j Y_j(X_i) exp(βᵀZ_j)]`.
pub fn log_partial_likelihood(cohort: &SortedCohort, beta: &[f64]) -> Result<f64> {
    if cohort.event_count() == 0 {
        // no terms contribute
        return Ok(0.0);
    }
    Ok(rows_evaluate(cohort.rows(), beta, false)?.loglik)
}

/// Score `U(β)` and information `H(β)`.
pub fn score_and_hessian(cohort: &SortedCohort, beta: &[f64]) -> Result<(Vec<f64>, Matrix)> {
    let ev = rows_evaluate(cohort.rows(), beta, true)?;
    Ok((ev.score, ev.hessian.expect("second moments requested")))
}

/// `norm² Σ_i w_i² δ_i {Z_i − Z̄(β, X_i)}^{⊗2}`.
///
/// With unit weights and `norm = 1/N` this is the event-term sum of the
/// sandwich meat; on a subsample it is `Ṽ`.
pub(crate) fn rows_event_outer(rows: &SortedRows, beta: &[f64]) -> Result<Matrix> {
    let p = rows.p();
    let (eta, shift) = sorted_predictors(rows, beta)?;
    let sums = rows_risk_sums(rows, &eta, shift, false)?;
    let grid = rows.grid();
    let mut v = Matrix::zeros(p);
    let mut d = vec![0.0; p];
    for k in 0..grid.len() {
        let zbar = sums.zbar(k);
        let start = grid.risk_start[k];
        for pos in start..start + grid.counts[k] {
            let w = rows.weight(pos);
            for (a, (z, m)) in rows.z(pos).iter().zip(&zbar).enumerate() {
                d[a] = z - m;
            }
            v.add_outer(&d, w * w);
        }
    }
    let norm = rows.norm();
    v.scale(norm * norm);
    v.symmetrize();
    Ok(v)
}

/// Newton–Raphson controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub score_tol: f64,
    pub step_tol: f64,
    pub max_halvings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 50,
            score_tol: 1e-8,
            step_tol: 1e-10,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonResult {
    pub beta: Vec<f64>,
    pub loglik: f64,
    pub score: Vec<f64>,
    pub hessian: Matrix,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Slack for accepting a step whose log-likelihood change is pure rounding.
fn loglik_slack(l: f64) -> f64 {
    1e-13 * (1.0 + l.abs())
}

pub(crate) fn rows_newton(
    rows: &SortedRows,
    beta_init: &[f64],
    opts: &SolverOptions,
) -> Result<NewtonResult> {
    if rows.grid().is_empty() {
        return Err(CoxError::ZeroEvents);
    }
    let mut beta = beta_init.to_vec();
    let mut cur = rows_evaluate(rows, &beta, true)?;
    let mut trace = vec![cur.loglik];
    for iter in 0..=opts.max_iter {
        let hessian = cur.hessian.clone().expect("second moments requested");
        let chol = Cholesky::new(&hessian)?;
        if max_abs(&cur.score) <= opts.score_tol {
            return Ok(NewtonResult {
                beta,
                loglik: cur.loglik,
                score: cur.score,
                hessian,
                iterations: iter,
                converged: true,
                trace,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let mut step = chol.solve(&cur.score);
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + s).collect();
            match rows_evaluate(rows, &cand, true) {
                Ok(ev) if ev.loglik >= cur.loglik - loglik_slack(cur.loglik) => {
                    accepted = Some((cand, ev));
                    break;
                }
                // overflow in exp or a worse likelihood: shorten the step
                Ok(_) | Err(CoxError::NonFinite(_)) | Err(CoxError::EmptyRiskSet(_)) => {
                    step.iter_mut().for_each(|s| *s *= 0.5);
                }
                Err(e) => return Err(e),
            }
        }
        let Some((cand, ev)) = accepted else {
            return Err(CoxError::LineSearch(opts.max_halvings));
        };
        let step_size = max_abs(&step);
        beta = cand;
        cur = ev;
        trace.push(cur.loglik);
        if step_size <= opts.step_tol {
            let hessian = cur.hessian.clone().expect("second moments requested");
            return Ok(NewtonResult {
                beta,
                loglik: cur.loglik,
                score: cur.score,
                hessian,
                iterations: iter + 1,
                converged: true,
                trace,
            });
        }
    }
    Err(CoxError::NotConverged {
        iterations: opts.max_iter,
        score_norm: max_abs(&cur.score),
        beta,
    })
}

/// Full-data maximum partial likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoxFit {
    pub beta: Vec<f64>,
    pub loglik: f64,
    pub score_norm: f64,
    #[serde(skip)]
    pub hessian: Option<Matrix>,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after each accepted step, starting at `beta_init`.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl CoxFit {
    pub fn hessian(&self) -> &Matrix {
        self.hessian.as_ref().expect("fit carries its Hessian")
    }

    /// Model-based standard errors `sqrt(diag(H⁻¹)/N)`.
    pub fn model_se(&self, n: usize) -> Result<Vec<f64>> {
        let inv = Cholesky::new(self.hessian())?.inverse();
        Ok(inv
            .diagonal()
            .iter()
            .map(|v| (v / n as f64).sqrt())
            .collect())
    }
}

pub fn newton_solve(
    cohort: &SortedCohort,
    beta_init: &[f64],
    opts: &SolverOptions,
) -> Result<CoxFit> {
    if cohort.event_count() == 0 {
        return Err(CoxError::ZeroEvents);
    }
    let r = rows_newton(cohort.rows(), beta_init, opts)?;
    Ok(CoxFit {
        score_norm: max_abs(&r.score),
        beta: r.beta,
        loglik: r.loglik,
        hessian: Some(r.hessian),
        iterations: r.iterations,
        converged: r.converged,
        trace: r.trace,
    })
}

/// Fit from `β = 0` with default options.
pub fn fit(cohort: &SortedCohort) -> Result<CoxFit> {
    newton_solve(cohort, &vec![0.0; cohort.p()], &SolverOptions::default())
}

/// `H⁻¹ V H⁻¹` on the full data with `π_i = 1/N`, where
/// `V = (1/N²) Σ_i δ_i {Z_i − Z̄(β, X_i)}^{⊗2}`.
pub fn full_data_sandwich(cohort: &SortedCohort, fit: &CoxFit) -> Result<Matrix> {
    let v = rows_event_outer(cohort.rows(), &fit.beta)?;
    crate::linalg::sandwich(fit.hessian(), &v)
}

/// Right-continuous step function for a cumulative hazard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHazard {
    pub times: Vec<f64>,
    pub increments: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl BaselineHazard {
    pub fn from_increments(times: Vec<f64>, increments: Vec<f64>) -> Self {
        let cumulative = increments
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        BaselineHazard {
            times,
            increments,
            cumulative,
        }
    }

    /// `Λ(t) = Σ_{t_k ≤ t} ΔΛ_k`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

/// Breslow-type increments `Σ_{i∈D_k} w_i / Σ_j w_j Y_j(t_k) exp(βᵀZ_j)`.
pub(crate) fn rows_breslow(rows: &SortedRows, beta: &[f64]) -> Result<BaselineHazard> {
    let grid = rows.grid();
    if grid.is_empty() {
        return Ok(BaselineHazard::from_increments(Vec::new(), Vec::new()));
    }
    let (eta, shift) = sorted_predictors(rows, beta)?;
    let sums = rows_risk_sums(rows, &eta, shift, false)?;
    let norm = rows.norm();
    let scale = (-shift).exp();
    let increments = (0..grid.len())
        .map(|k| rows.weighted_events(k) * norm / sums.s0[k] * scale)
        .collect();
    Ok(BaselineHazard::from_increments(
        grid.times.clone(),
        increments,
    ))
}

pub fn breslow(cohort: &SortedCohort, beta: &[f64]) -> Result<BaselineHazard> {
    rows_breslow(cohort.rows(), beta)
}
