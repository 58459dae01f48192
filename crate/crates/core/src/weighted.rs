//! Inverse-probability-weighted Cox estimation on a subsample: weighted
//! estimating equation, sandwich covariance, weighted Breslow estimator with
//! its variance, and the two-stage optimal subsampling driver.

use serde::{Deserialize, Serialize};

use crate::cox::{
    rows_breslow, rows_evaluate, rows_event_outer, rows_newton, rows_risk_sums, sorted_predictors,
    BaselineHazard, RiskSetSums, SolverOptions,
};
use crate::data::{SortedCohort, SortedRows};
use crate::error::{CoxError, Result};
use crate::linalg::{dot, max_abs, sandwich, Cholesky, Matrix};
use crate::rng::{label, split, CoxRng};
use crate::stats::normal_quantile;
use crate::subsampling::{draw_subsample, pilot_stage, plan_for, Method, Subsample};

/// A subsample sorted by time with weights `1/π*_i` and normalizer `1/(N r)`.
#[derive(Debug, Clone)]
pub struct WeightedProblem {
    rows: SortedRows,
    source_n: usize,
    r: usize,
}

impl WeightedProblem {
    pub fn new(sub: &Subsample, cohort: &SortedCohort) -> Result<Self> {
        let n = cohort.len();
        if sub.source_n != n {
            return Err(CoxError::Dimension {
                expected: n,
                got: sub.source_n,
            });
        }
        if sub.indices.len() != sub.r || sub.probs_at_draw.len() != sub.r {
            return Err(CoxError::Invalid("subsample arrays disagree with r".into()));
        }
        if let Some(&i) = sub.indices.iter().find(|&&i| i >= n) {
            return Err(CoxError::Invalid(format!(
                "subsample index {i} out of range"
            )));
        }
        if sub
            .probs_at_draw
            .iter()
            .any(|&p| p <= 0.0 || !p.is_finite())
        {
            return Err(CoxError::Invalid(
                "subsample probabilities must be positive".into(),
            ));
        }
        let weights: Vec<f64> = sub.probs_at_draw.iter().map(|p| 1.0 / p).collect();
        let norm = 1.0 / (n as f64 * sub.r as f64);
        let (rows, _) = SortedRows::build(cohort.base(), &sub.indices, Some(&weights), norm);
        if rows.grid().is_empty() {
            return Err(CoxError::SubsampleNoEvents);
        }
        Ok(WeightedProblem {
            rows,
            source_n: n,
            r: sub.r,
        })
    }

    pub fn rows(&self) -> &SortedRows {
        &self.rows
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn event_times(&self) -> &[f64] {
        &self.rows.grid().times
    }

    pub fn risk_sums(&self, beta: &[f64]) -> Result<RiskSetSums> {
        let (eta, shift) = sorted_predictors(&self.rows, beta)?;
        rows_risk_sums(&self.rows, &eta, shift, true)
    }

    /// `ℓ*(β)`.
    pub fn log_likelihood(&self, beta: &[f64]) -> Result<f64> {
        Ok(rows_evaluate(&self.rows, beta, false)?.loglik)
    }

    pub fn score_hessian(&self, beta: &[f64]) -> Result<(Vec<f64>, Matrix)> {
        let ev = rows_evaluate(&self.rows, beta, true)?;
        Ok((ev.score, ev.hessian.expect("second moments requested")))
    }

    pub fn newton(&self, beta_init: &[f64], opts: &SolverOptions) -> Result<WeightedFit> {
        let res = rows_newton(&self.rows, beta_init, opts)?;
        let p = self.rows.p();
        Ok(WeightedFit {
            beta: res.beta,
            sigma: Matrix::zeros(p),
            h_tilde: res.hessian,
            v_tilde: Matrix::zeros(p),
            loglik: res.loglik,
            score_norm: max_abs(&res.score),
            iterations: res.iterations,
            converged: res.converged,
            pilot_beta: beta_init.to_vec(),
        })
    }

    /// `Ṽ = (1/(N²r²)) Σ_i π*_i⁻² ∫ {Z*_i − Z̄*(β,t)}^{⊗2} dN*_i(t)`.
    pub fn v_tilde(&self, beta: &[f64]) -> Result<Matrix> {
        rows_event_outer(&self.rows, beta)
    }

    /// `Ṽ` from the full per-draw influence `ψ_i = w_i {δ_i (Z_i − Z̄*(X_i)) − q*_i}`:
    /// `(1/(N²r²)) Σ_i (ψ_i − ψ̄_h)^{⊗2}`, where `q*_i` is the subsample
    /// analogue of the risk-set influence and `ψ̄_h` is the mean over draws of
    /// the same censoring status when the draw was stratified (zero otherwise).
    pub fn v_influence(&self, beta: &[f64], stratified: bool) -> Result<Matrix> {
        let rows = &self.rows;
        let p = rows.p();
        let n = rows.len();
        let grid = rows.grid();
        let k_len = grid.len();
        let (eta, shift) = sorted_predictors(rows, beta)?;
        let sums = rows_risk_sums(rows, &eta, shift, false)?;
        let norm = rows.norm();
        // prefix sums of dN̄*_k / S*0_k and dN̄*_k Z̄*_k / S*0_k (shifted scale)
        let mut a = vec![0.0; k_len];
        let mut b = vec![0.0; k_len * p];
        let mut acc_a = 0.0;
        let mut acc_b = vec![0.0; p];
        for k in 0..k_len {
            let jump = norm * rows.weighted_events(k) / sums.s0[k];
            acc_a += jump;
            let s1 = sums.s1(k);
            for d in 0..p {
                acc_b[d] += jump * s1[d] / sums.s0[k];
            }
            a[k] = acc_a;
            b[k * p..(k + 1) * p].copy_from_slice(&acc_b);
        }
        let mut psi = vec![0.0; n * p];
        let mut m = 0;
        for pos in 0..n {
            let t = rows.times()[pos];
            while m < k_len && grid.times[m] <= t {
                m += 1;
            }
            let z = rows.z(pos);
            let w = rows.weight(pos);
            let row = &mut psi[pos * p..(pos + 1) * p];
            if m > 0 {
                let e = (eta[pos] - shift).exp();
                let bk = &b[(m - 1) * p..m * p];
                for d in 0..p {
                    row[d] -= w * e * (z[d] * a[m - 1] - bk[d]);
                }
            }
            if rows.status()[pos] {
                let k = m - 1;
                let s1 = sums.s1(k);
                for d in 0..p {
                    row[d] += w * (z[d] - s1[d] / sums.s0[k]);
                }
            }
        }
        let mut centre = [vec![0.0; p], vec![0.0; p]];
        if stratified {
            let mut count = [0usize; 2];
            for pos in 0..n {
                let h = usize::from(rows.status()[pos]);
                count[h] += 1;
                for d in 0..p {
                    centre[h][d] += psi[pos * p + d];
                }
            }
            for h in 0..2 {
                if count[h] > 0 {
                    centre[h].iter_mut().for_each(|x| *x /= count[h] as f64);
                }
            }
        }
        let mut v = Matrix::zeros(p);
        let mut dev = vec![0.0; p];
        for pos in 0..n {
            let c = &centre[usize::from(rows.status()[pos])];
            for d in 0..p {
                dev[d] = psi[pos * p + d] - c[d];
            }
            v.add_outer(&dev, norm * norm);
        }
        Ok(v)
    }

    /// `(Σ̃, Ṽ)` with `Σ̃ = H̃⁻¹ Ṽ H̃⁻¹` and the event-term `Ṽ`.
    pub fn sandwich(&self, beta: &[f64], h_tilde: &Matrix) -> Result<(Matrix, Matrix)> {
        self.sandwich_with(beta, h_tilde, VarianceKind::Printed, false)
    }

    pub fn sandwich_with(
        &self,
        beta: &[f64],
        h_tilde: &Matrix,
        kind: VarianceKind,
        stratified: bool,
    ) -> Result<(Matrix, Matrix)> {
        let v = match kind {
            VarianceKind::Printed => self.v_tilde(beta)?,
            VarianceKind::Influence => self.v_influence(beta, stratified)?,
        };
        let sigma = sandwich(h_tilde, &v)?;
        Ok((sigma, v))
    }

    pub fn breslow(&self, beta: &[f64]) -> Result<BaselineHazard> {
        rows_breslow(&self.rows, beta)
    }

    /// Plug-in variance components of the weighted Breslow estimator at each
    /// subsample event time.
    pub fn lambda_variance(
        &self,
        beta: &[f64],
        sigma: &Matrix,
        h_tilde: &Matrix,
    ) -> Result<LambdaVariance> {
        let rows = &self.rows;
        let p = rows.p();
        let grid = rows.grid();
        let k_len = grid.len();
        let (eta, shift) = sorted_predictors(rows, beta)?;
        let sums = rows_risk_sums(rows, &eta, shift, false)?;
        let norm = rows.norm();
        let unshift = (-shift).exp();
        // S*^(0) on the natural scale is s0·e^{shift}; keep e^{-shift} factors explicit.
        let inv_s0 = |k: usize| unshift / sums.s0[k];

        let mut gamma = vec![0.0; k_len * p];
        let mut psi = vec![0.0; k_len];
        let mut phi = vec![0.0; p];
        let mut g_acc = vec![0.0; p];
        let mut psi1_acc = 0.0;
        // C_k = Σ_{j ≤ k} dN̄*_j / S*^(0)_j², integrated against exp(η_i)
        let mut c = vec![0.0; k_len];
        let mut c_acc = 0.0;
        for k in 0..k_len {
            let start = grid.risk_start[k];
            let events = start..start + grid.counts[k];
            let dnbar = norm * rows.weighted_events(k);
            let zbar = sums.zbar(k);
            let is0 = inv_s0(k);
            for d in 0..p {
                g_acc[d] += zbar[d] * is0 * dnbar;
            }
            gamma[k * p..(k + 1) * p].copy_from_slice(&g_acc);
            let w2: f64 = events.clone().map(|pos| rows.weight(pos).powi(2)).sum();
            psi1_acc += w2 * is0 * is0;
            psi[k] = psi1_acc;
            c_acc += dnbar * is0 * is0;
            c[k] = c_acc;
            for pos in events {
                let w2 = rows.weight(pos).powi(2);
                let z = rows.z(pos);
                for d in 0..p {
                    phi[d] += w2 * (z[d] - zbar[d]) * is0;
                }
            }
        }
        let norm2 = norm * norm;
        psi.iter_mut().for_each(|x| *x *= norm2);
        phi.iter_mut().for_each(|x| *x *= norm2);

        // Second Ψ term: Σ_i w_i² [exp(η_i) C(min(X_i, t))]².
        // Rows still at risk at t_k contribute C_k² · Σ_{X_i ≥ t_k} w_i² e_i²;
        // rows that left earlier contribute their own frozen C(X_i)².
        let n = rows.len();
        let e2: Vec<f64> = (0..n)
            .map(|pos| {
                let e = (eta[pos] - shift).exp();
                rows.weight(pos).powi(2) * e * e
            })
            .collect();
        let exp_shift2 = (2.0 * shift).exp();
        let mut suffix = vec![0.0; n + 1];
        for pos in (0..n).rev() {
            suffix[pos] = suffix[pos + 1] + e2[pos];
        }
        let mut departed = 0.0;
        let mut pos = 0;
        let mut m = 0; // event times <= current row time
        for k in 0..k_len {
            let start = grid.risk_start[k];
            while pos < start {
                let t = rows.times()[pos];
                while m < k_len && grid.times[m] <= t {
                    m += 1;
                }
                if m > 0 {
                    departed += e2[pos] * c[m - 1] * c[m - 1];
                }
                pos += 1;
            }
            let term2 = (departed + suffix[start] * c[k] * c[k]) * exp_shift2;
            psi[k] += norm2 * term2;
        }

        let h_inv = Cholesky::new(h_tilde)?.inverse();
        let h_inv_phi = h_inv.mul_vec(&phi);
        let total = (0..k_len)
            .map(|k| {
                let g = &gamma[k * p..(k + 1) * p];
                sigma.quad_form(g) + psi[k] + dot(g, &h_inv_phi)
            })
            .collect();
        Ok(LambdaVariance {
            times: grid.times.clone(),
            p,
            gamma,
            psi,
            phi,
            total,
        })
    }
}

/// Which `Ṽ` enters the sandwich `Σ̃ = H̃⁻¹ Ṽ H̃⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceKind {
    /// Full influence `δ(Z − Z̄*) − q*`; tracks the sampling spread under
    /// non-uniform probabilities.
    #[default]
    Influence,
    /// Event term only: `(1/(N²r²)) Σ π*⁻² ∫ {Z* − Z̄*}^{⊗2} dN*`.
    Printed,
}

impl VarianceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarianceKind::Influence => "influence",
            VarianceKind::Printed => "printed",
        }
    }
}

impl std::str::FromStr for VarianceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "influence" => Ok(VarianceKind::Influence),
            "printed" => Ok(VarianceKind::Printed),
            other => Err(format!(
                "unknown variance estimator {other:?}; expected influence or printed"
            )),
        }
    }
}

/// Subsample estimate with its sandwich covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedFit {
    pub beta: Vec<f64>,
    /// `Σ̃ = H̃⁻¹ Ṽ H̃⁻¹`, on the variance scale of `β̃ − β̂_N`.
    pub sigma: Matrix,
    pub h_tilde: Matrix,
    pub v_tilde: Matrix,
    pub loglik: f64,
    pub score_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub pilot_beta: Vec<f64>,
}

impl WeightedFit {
    pub fn se(&self) -> Vec<f64> {
        self.sigma
            .diagonal()
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect()
    }
}

/// Variance of the weighted Breslow estimator at each jump time:
/// `Σ̃_Λ(t) = Γ̃ᵀ Σ̃ Γ̃ + Ψ̃ + Γ̃ᵀ H̃⁻¹ Φ̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaVariance {
    pub times: Vec<f64>,
    pub p: usize,
    /// `K × p`, row-major.
    pub gamma: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub total: Vec<f64>,
}

impl LambdaVariance {
    pub fn gamma(&self, k: usize) -> &[f64] {
        &self.gamma[k * self.p..(k + 1) * self.p]
    }

    /// Right-continuous evaluation; zero before the first jump.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            0.0
        } else {
            self.total[k - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedBaseline {
    pub hazard: BaselineHazard,
    pub variance: Option<LambdaVariance>,
}

impl WeightedBaseline {
    pub fn eval(&self, t: f64) -> f64 {
        self.hazard.eval(t)
    }
}

pub fn weighted_risk_sums(
    sub: &Subsample,
    cohort: &SortedCohort,
    beta: &[f64],
) -> Result<RiskSetSums> {
    WeightedProblem::new(sub, cohort)?.risk_sums(beta)
}

pub fn weighted_log_likelihood(
    sub: &Subsample,
    cohort: &SortedCohort,
    beta: &[f64],
) -> Result<f64> {
    WeightedProblem::new(sub, cohort)?.log_likelihood(beta)
}

/// `U*(β)` and `H̃(β) = −∂U*/∂βᵀ`.
pub fn weighted_score_hessian(
    sub: &Subsample,
    cohort: &SortedCohort,
    beta: &[f64],
) -> Result<(Vec<f64>, Matrix)> {
    WeightedProblem::new(sub, cohort)?.score_hessian(beta)
}

/// Solve `U*(β) = 0`. Only `beta`, `h_tilde` and solver diagnostics are
/// populated; see [`sandwich_variance`].
pub fn weighted_newton(
    sub: &Subsample,
    cohort: &SortedCohort,
    beta_init: &[f64],
    opts: &SolverOptions,
) -> Result<WeightedFit> {
    WeightedProblem::new(sub, cohort)?.newton(beta_init, opts)
}

pub fn sandwich_variance(
    sub: &Subsample,
    cohort: &SortedCohort,
    beta: &[f64],
    h_tilde: &Matrix,
) -> Result<(Matrix, Matrix)> {
    WeightedProblem::new(sub, cohort)?.sandwich(beta, h_tilde)
}

pub fn weighted_breslow(
    sub: &Subsample,
    cohort: &SortedCohort,
    beta: &[f64],
    with_variance: bool,
) -> Result<WeightedBaseline> {
    let prob = WeightedProblem::new(sub, cohort)?;
    let hazard = prob.breslow(beta)?;
    let variance = if with_variance {
        let (_, h) = prob.score_hessian(beta)?;
        let (sigma, _) = prob.sandwich(beta, &h)?;
        Some(prob.lambda_variance(beta, &sigma, &h)?)
    } else {
        None
    };
    Ok(WeightedBaseline { hazard, variance })
}

/// Per-coordinate Wald interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

pub fn wald_intervals(beta: &[f64], se: &[f64], level: f64) -> Result<Vec<Interval>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(CoxError::Invalid(format!(
            "confidence level {level} must lie in (0, 1)"
        )));
    }
    let z = normal_quantile(0.5 * (1.0 + level));
    Ok(beta
        .iter()
        .zip(se)
        .map(|(b, s)| Interval {
            lower: b - z * s,
            upper: b + z * s,
        })
        .collect())
}

/// `β̃_j ± z_{(1+level)/2} sqrt(Σ̃_jj)`.
pub fn confidence_intervals(fit: &WeightedFit, level: f64) -> Result<Vec<Interval>> {
    wald_intervals(&fit.beta, &fit.se(), level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Algorithm1Options {
    pub solver: SolverOptions,
    pub lambda_variance: bool,
    pub variance: VarianceKind,
    /// Subsample size of the pilot stage; defaults to `r`.
    pub pilot_r: Option<usize>,
}

impl Default for Algorithm1Options {
    fn default() -> Self {
        Algorithm1Options {
            solver: SolverOptions::default(),
            lambda_variance: true,
            variance: VarianceKind::default(),
            pilot_r: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Algorithm1Output {
    pub method: Method,
    pub r: usize,
    pub fit: WeightedFit,
    pub baseline: WeightedBaseline,
    pub subsample: Subsample,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn run_algorithm1(
    cohort: &SortedCohort,
    r: usize,
    method: Method,
    rng: &mut CoxRng,
) -> Result<Algorithm1Output> {
    run_algorithm1_with(cohort, r, method, rng, &Algorithm1Options::default())
}

/// Two-stage subsampling: uniform pilot, probabilities at the pilot
/// estimate, weighted fit on a size-`r` draw started from the pilot,
/// sandwich covariance and weighted Breslow estimator.
pub fn run_algorithm1_with(
    cohort: &SortedCohort,
    r: usize,
    method: Method,
    rng: &mut CoxRng,
    opts: &Algorithm1Options,
) -> Result<Algorithm1Output> {
    let p = cohort.p();
    if r < 2 * (p + 1) {
        return Err(CoxError::Invalid(format!(
            "r = {r} is below 2(p+1) = {}",
            2 * (p + 1)
        )));
    }
    let pilot_r = opts.pilot_r.unwrap_or(r);
    let (pilot, _) = pilot_stage(cohort, pilot_r, rng).map_err(|e| e.at_stage("pilot"))?;
    let plan = plan_for(cohort, method, &pilot.beta).map_err(|e| e.at_stage("probabilities"))?;
    let mut draw_rng = split(rng, &[label::DRAW]);
    let sub = draw_subsample(&plan, r, &mut draw_rng).map_err(|e| e.at_stage("draw"))?;
    let prob = WeightedProblem::new(&sub, cohort).map_err(|e| e.at_stage("subsample"))?;
    let mut fit = prob
        .newton(&pilot.beta, &opts.solver)
        .map_err(|e| e.at_stage("subsample fit"))?;
    let (sigma, v) = prob
        .sandwich_with(&fit.beta, &fit.h_tilde, opts.variance, plan.stratified)
        .map_err(|e| e.at_stage("variance"))?;
    fit.sigma = sigma;
    fit.v_tilde = v;
    let hazard = prob.breslow(&fit.beta).map_err(|e| e.at_stage("breslow"))?;
    let variance = if opts.lambda_variance {
        Some(
            prob.lambda_variance(&fit.beta, &fit.sigma, &fit.h_tilde)
                .map_err(|e| e.at_stage("breslow variance"))?,
        )
    } else {
        None
    };
    Ok(Algorithm1Output {
        method,
        r,
        fit,
        baseline: WeightedBaseline { hazard, variance },
        subsample: sub,
        warnings: plan.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Cohort;

    fn cohort() -> SortedCohort {
        let times = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let status = vec![true, false, true, true, false, true];
        let z = vec![
            0.5, 1.0, -0.2, 0.0, 0.3, 1.1, -0.7, 0.4, 0.9, -0.3, 0.2, 0.8,
        ];
        SortedCohort::new(Cohort::new(2, times, status, z).unwrap())
    }

    #[test]
    fn single_event_draw() {
        let c = cohort();
        let sub = Subsample {
            indices: vec![2],
            probs_at_draw: vec![0.25],
            r: 1,
            source_n: 6,
        };
        let sums = weighted_risk_sums(&sub, &c, &[0.3, -0.1]).unwrap();
        assert_eq!(sums.zbar(0), c.base().z(2).to_vec());
        let (u, _) = weighted_score_hessian(&sub, &c, &[1.0, 2.0]).unwrap();
        assert!(u.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn censored_only_subsample_rejected() {
        let c = cohort();
        let sub = Subsample {
            indices: vec![1, 4, 1],
            probs_at_draw: vec![0.1; 3],
            r: 3,
            source_n: 6,
        };
        let err = weighted_newton(&sub, &c, &[0.0, 0.0], &SolverOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "subsample has no events");
    }

    #[test]
    fn constant_covariate_in_subsample_is_singular() {
        let c = cohort();
        // records 0 and 2 both... use repeated copies so every drawn row shares z
        let sub = Subsample {
            indices: vec![0, 0, 0, 0],
            probs_at_draw: vec![0.2; 4],
            r: 4,
            source_n: 6,
        };
        let err = weighted_newton(&sub, &c, &[0.0, 0.0], &SolverOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "Hessian singular");
    }

    #[test]
    fn interval_half_width() {
        let fit = WeightedFit {
            beta: vec![1.0],
            sigma: Matrix::from_row_major(1, vec![0.01]).unwrap(),
            h_tilde: Matrix::identity(1),
            v_tilde: Matrix::zeros(1),
            loglik: 0.0,
            score_norm: 0.0,
            iterations: 0,
            converged: true,
            pilot_beta: vec![0.0],
        };
        let ci = confidence_intervals(&fit, 0.95).unwrap();
        assert!((ci[0].upper - 1.0 - 0.1959963984540054).abs() < 1e-12);
        assert!((1.0 - ci[0].lower - 0.1959963984540054).abs() < 1e-12);
        let tiny = confidence_intervals(&fit, 1e-12).unwrap();
        assert!((tiny[0].upper - tiny[0].lower).abs() < 1e-12);
        assert!(confidence_intervals(&fit, 1.0).is_err());
        assert!(confidence_intervals(&fit, 0.0).is_err());
        assert!(confidence_intervals(&fit, -0.5).is_err());
    }
}
