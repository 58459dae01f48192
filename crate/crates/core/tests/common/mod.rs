//! Independent brute-force implementations used as test oracles.
//!
//! Nothing here reuses the library's sorted passes: every quantity is a
//! direct double loop over records.

#![allow(dead_code)]

use coxsub::data::Cohort;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random cohort with standard-normal-ish covariates; `tie_grid > 0` rounds
/// times to that many distinct values to force ties.
pub fn random_cohort(rng: &mut ChaCha8Rng, n: usize, p: usize, tie_grid: usize) -> Cohort {
    loop {
        let z: Vec<f64> = (0..n * p)
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let mut times: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 5.0 + 0.01).collect();
        if tie_grid > 0 {
            for t in &mut times {
                *t = ((*t * tie_grid as f64 / 5.0).ceil()).max(1.0);
            }
        }
        let status: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.65).collect();
        // need at least one event and one censored record
        if status.iter().any(|&s| s) && status.iter().any(|&s| !s) {
            return Cohort::new(p, times, status, z).unwrap();
        }
    }
}

pub fn random_beta(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> Vec<f64> {
    (0..p)
        .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * scale)
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        close(a, b, tol),
        "{what}: {a} vs {b} (diff {:e})",
        (a - b).abs()
    );
}

/// Distinct event times in ascending order.
pub fn event_times(c: &Cohort) -> Vec<f64> {
    let mut t: Vec<f64> = (0..c.len())
        .filter(|&i| c.is_event(i))
        .map(|i| c.time(i))
        .collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// A weighted view of records: indices (possibly repeated) with weights.
pub struct Sample<'a> {
    pub c: &'a Cohort,
    pub idx: Vec<usize>,
    pub w: Vec<f64>,
    pub norm: f64,
}

impl<'a> Sample<'a> {
    pub fn full(c: &'a Cohort) -> Self {
        Sample {
            c,
            idx: (0..c.len()).collect(),
            w: vec![1.0; c.len()],
            norm: 1.0 / c.len() as f64,
        }
    }

    pub fn weighted(c: &'a Cohort, idx: &[usize], probs: &[f64], r: usize) -> Self {
        Sample {
            c,
            idx: idx.to_vec(),
            w: probs.iter().map(|p| 1.0 / p).collect(),
            norm: 1.0 / (c.len() as f64 * r as f64),
        }
    }

    /// `(S0, S1, S2)` at time `t`, natural scale, normalized.
    pub fn sums(&self, beta: &[f64], t: f64) -> (f64, Vec<f64>, Vec<f64>) {
        let p = self.c.p();
        let mut s0 = 0.0;
        let mut s1 = vec![0.0; p];
        let mut s2 = vec![0.0; p * p];
        for (k, &i) in self.idx.iter().enumerate() {
            if self.c.time(i) >= t {
                let z = self.c.z(i);
                let e = self.w[k] * dot(z, beta).exp();
                s0 += e;
                for a in 0..p {
                    s1[a] += e * z[a];
                    for b in 0..p {
                        s2[a * p + b] += e * z[a] * z[b];
                    }
                }
            }
        }
        let n = self.norm;
        (
            n * s0,
            s1.iter().map(|x| n * x).collect(),
            s2.iter().map(|x| n * x).collect(),
        )
    }

    pub fn event_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .idx
            .iter()
            .filter(|&&i| self.c.is_event(i))
            .map(|&i| self.c.time(i))
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    /// `norm · Σ w δ [η − ln Σ_{X_j ≥ X_i} w_j e^{η_j}]`.
    pub fn loglik(&self, beta: &[f64]) -> f64 {
        let mut l = 0.0;
        for (k, &i) in self.idx.iter().enumerate() {
            if !self.c.is_event(i) {
                continue;
            }
            let (s0, _, _) = self.sums(beta, self.c.time(i));
            l += self.w[k] * (dot(self.c.z(i), beta) - (s0 / self.norm).ln());
        }
        self.norm * l
    }

    pub fn score(&self, beta: &[f64]) -> Vec<f64> {
        let p = self.c.p();
        let mut u = vec![0.0; p];
        for (k, &i) in self.idx.iter().enumerate() {
            if !self.c.is_event(i) {
                continue;
            }
            let (s0, s1, _) = self.sums(beta, self.c.time(i));
            let z = self.c.z(i);
            for a in 0..p {
                u[a] += self.norm * self.w[k] * (z[a] - s1[a] / s0);
            }
        }
        u
    }
}

/// `q_i = Σ_{event j: X_j ≤ X_i} (1/N) {Z_i − Z̄(X_j)} e^{η_i} / S0(X_j)`,
/// summing over event records (so tied events count once each).
pub fn q_scores(c: &Cohort, beta: &[f64]) -> Vec<Vec<f64>> {
    let full = Sample::full(c);
    let n = c.len() as f64;
    let p = c.p();
    (0..c.len())
        .map(|i| {
            let mut q = vec![0.0; p];
            let e = dot(c.z(i), beta).exp();
            for j in 0..c.len() {
                if c.is_event(j) && c.time(j) <= c.time(i) {
                    let (s0, s1, _) = full.sums(beta, c.time(j));
                    for a in 0..p {
                        q[a] += (c.z(i)[a] - s1[a] / s0) * e / s0 / n;
                    }
                }
            }
            q
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Optimal probabilities straight from their definition.
pub fn optimal_probs(c: &Cohort, beta: &[f64], full_opt: bool) -> Vec<f64> {
    let q = q_scores(c, beta);
    let full = Sample::full(c);
    let n = c.len();
    let d = (0..n).filter(|&i| c.is_event(i)).count() as f64;
    let event_rate = d / n as f64;
    let score: Vec<f64> = (0..n)
        .map(|i| {
            if !c.is_event(i) {
                norm(&q[i])
            } else if full_opt {
                let (s0, s1, _) = full.sums(beta, c.time(i));
                let diff: Vec<f64> = (0..c.p()).map(|a| c.z(i)[a] - s1[a] / s0).collect();
                (norm(&diff).powi(2) + norm(&q[i]).powi(2)).sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let tot0: f64 = (0..n).filter(|&i| !c.is_event(i)).map(|i| score[i]).sum();
    let tot1: f64 = (0..n).filter(|&i| c.is_event(i)).map(|i| score[i]).sum();
    (0..n)
        .map(|i| {
            if c.is_event(i) {
                event_rate * score[i] / tot1
            } else {
                (1.0 - event_rate) * score[i] / tot0
            }
        })
        .collect()
}

/// Nelson–Aalen increments `d_k / n_k` at the distinct event times.
pub fn nelson_aalen(c: &Cohort) -> (Vec<f64>, Vec<f64>) {
    let times = event_times(c);
    let inc = times
        .iter()
        .map(|&t| {
            let d = (0..c.len())
                .filter(|&i| c.is_event(i) && c.time(i) == t)
                .count();
            let at_risk = (0..c.len()).filter(|&i| c.time(i) >= t).count();
            d as f64 / at_risk as f64
        })
        .collect();
    (times, inc)
}

/// Central finite difference of `f` along coordinate `a`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], a: usize, h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[a] += h;
    xm[a] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

use coxsub::cox::{
    breslow, log_partial_likelihood, newton_solve, risk_set_sums, score_and_hessian, SolverOptions,
};
use coxsub::data::SortedCohort;
use coxsub::rng::substream;
use coxsub::subsampling::{
    cenopt_probs, draw_subsample, fullopt_probs, q_scores as lib_q, Subsample,
};
use coxsub::weighted::{
    weighted_log_likelihood, weighted_newton, weighted_risk_sums, weighted_score_hessian,
};

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Library risk-set sums at its event grid against the direct sums.
pub fn check_risk_sums(
    sample: &Sample,
    lib: &coxsub::RiskSetSums,
    beta: &[f64],
    tol: f64,
) -> Result<(), String> {
    let times = sample.event_times();
    check(times.len() == lib.len(), || {
        format!("grid size {} vs {}", lib.len(), times.len())
    })?;
    let p = sample.c.p();
    let scale = lib.shift.exp();
    for (k, &t) in times.iter().enumerate() {
        let (s0, s1, s2) = sample.sums(beta, t);
        check(close(lib.s0[k] * scale, s0, tol), || {
            format!("S0 at {t}: {} vs {s0}", lib.s0[k] * scale)
        })?;
        for a in 0..p {
            check(close(lib.s1(k)[a] * scale, s1[a], tol), || {
                format!("S1[{a}] at {t}")
            })?;
        }
        for ab in 0..p * p {
            check(close(lib.s2(k)[ab] * scale, s2[ab], tol), || {
                format!("S2[{ab}] at {t}")
            })?;
        }
    }
    Ok(())
}

/// Risk sums, q-scores, both optimal plans, and weighted sums/likelihood/score
/// on a subsample, all against direct double loops.
pub fn oracle_instance(seed: u64, tol: f64) -> Result<(), String> {
    let mut g = rng(seed);
    let n = 20 + (seed as usize * 37) % 181;
    let p = 1 + (seed as usize) % 4;
    let ties = if seed.is_multiple_of(3) { 12 } else { 0 };
    let c = random_cohort(&mut g, n, p, ties);
    let beta = random_beta(&mut g, p, 0.8);
    let sc = SortedCohort::new(c.clone());
    let full = Sample::full(&c);
    let ctx = |e: String| format!("seed {seed} (n={n}, p={p}): {e}");

    let lib = risk_set_sums(&sc, &beta).map_err(|e| ctx(e.to_string()))?;
    check_risk_sums(&full, &lib, &beta, tol).map_err(ctx)?;

    let q = q_scores(&c, &beta);
    let lq = lib_q(&sc, &beta).map_err(|e| ctx(e.to_string()))?;
    for i in 0..n {
        for a in 0..p {
            check(close(lq.row(i)[a], q[i][a], tol), || {
                ctx(format!("q[{i}][{a}]: {} vs {}", lq.row(i)[a], q[i][a]))
            })?;
        }
    }

    let mut plans = Vec::new();
    for full_opt in [true, false] {
        let plan = if full_opt {
            fullopt_probs(&sc, &beta)
        } else {
            cenopt_probs(&sc, &beta)
        }
        .map_err(|e| ctx(e.to_string()))?;
        let want = optimal_probs(&c, &beta, full_opt);
        for i in 0..n {
            check(close(plan.probs[i], want[i], tol), || {
                ctx(format!(
                    "π[{i}] (full_opt={full_opt}): {} vs {}",
                    plan.probs[i], want[i]
                ))
            })?;
        }
        let total: f64 = plan.probs.iter().sum();
        check((total - 1.0).abs() < 1e-12, || {
            ctx(format!("probabilities sum to {total}"))
        })?;
        plans.push(plan);
    }

    let r = 2 * n;
    let mut dr = substream(seed, &[7]);
    let sub = draw_subsample(&plans[0], r, &mut dr).map_err(|e| ctx(e.to_string()))?;
    if !sub.indices.iter().any(|&i| c.is_event(i)) {
        return Ok(());
    }
    let ws = Sample::weighted(&c, &sub.indices, &sub.probs_at_draw, r);
    let wl = weighted_risk_sums(&sub, &sc, &beta).map_err(|e| ctx(e.to_string()))?;
    check_risk_sums(&ws, &wl, &beta, tol).map_err(|e| ctx(format!("weighted {e}")))?;
    let l = weighted_log_likelihood(&sub, &sc, &beta).map_err(|e| ctx(e.to_string()))?;
    check(close(l, ws.loglik(&beta), tol), || {
        ctx(format!("ℓ*: {l} vs {}", ws.loglik(&beta)))
    })?;
    let (u, _) = weighted_score_hessian(&sub, &sc, &beta).map_err(|e| ctx(e.to_string()))?;
    let want = ws.score(&beta);
    for a in 0..p {
        check(close(u[a], want[a], tol), || {
            ctx(format!("U*[{a}]: {} vs {}", u[a], want[a]))
        })?;
    }
    Ok(())
}

/// Identity subsample reproduces the full-data fit.
pub fn identity_collapse(seed: u64, tol: f64) -> Result<f64, String> {
    let mut g = rng(seed);
    let p = 1 + (seed as usize) % 3;
    let c = random_cohort(&mut g, 150, p, 0);
    let sc = SortedCohort::new(c.clone());
    let opts = SolverOptions::default();
    let zero = vec![0.0; p];
    let full = newton_solve(&sc, &zero, &opts).map_err(|e| e.to_string())?;
    let sub = Subsample::identity(c.len());
    let w = weighted_newton(&sub, &sc, &zero, &opts).map_err(|e| e.to_string())?;
    let diff = full
        .beta
        .iter()
        .zip(&w.beta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(diff <= tol, || {
        format!("seed {seed}: max |β̃ − β̂| = {diff:e}")
    })?;
    Ok(diff)
}

/// Breslow at β = 0 against Nelson–Aalen; returns the max relative error.
pub fn breslow_nelson_aalen(seed: u64) -> Result<f64, String> {
    let mut g = rng(seed);
    let c = random_cohort(&mut g, 120, 2, if seed.is_multiple_of(2) { 10 } else { 0 });
    let sc = SortedCohort::new(c.clone());
    let h = breslow(&sc, &[0.0, 0.0]).map_err(|e| e.to_string())?;
    let (times, inc) = nelson_aalen(&c);
    check(h.times == times, || "jump times differ".into())?;
    let mut worst: f64 = 0.0;
    let mut cum = 0.0;
    for k in 0..times.len() {
        cum += inc[k];
        worst = worst
            .max((h.increments[k] - inc[k]).abs() / inc[k])
            .max((h.cumulative[k] - cum).abs() / cum);
    }
    check(worst <= 1e-13, || {
        format!("seed {seed}: relative error {worst:e}")
    })?;
    Ok(worst)
}

/// Analytic score and Hessian of ℓ (full) and ℓ* (subsample) against central
/// differences; returns the worst relative errors `(score, hessian)`.
pub fn calculus_instance(seed: u64) -> Result<(f64, f64), String> {
    let mut g = rng(seed);
    let p = 1 + (seed as usize) % 4;
    let c = random_cohort(
        &mut g,
        80 + (seed as usize) % 60,
        p,
        if seed.is_multiple_of(2) { 15 } else { 0 },
    );
    let beta = random_beta(&mut g, p, 0.5);
    let sc = SortedCohort::new(c.clone());
    let plan = fullopt_probs(&sc, &beta).map_err(|e| e.to_string())?;
    let mut dr = substream(seed, &[3]);
    let sub = draw_subsample(&plan, 150, &mut dr).map_err(|e| e.to_string())?;

    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
    let (mut ws, mut wh): (f64, f64) = (0.0, 0.0);
    let h = 1e-5;
    type Obj<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;
    type Grad<'a> = Box<dyn Fn(&[f64]) -> (Vec<f64>, coxsub::linalg::Matrix) + 'a>;
    let cases: Vec<(Obj, Grad)> = vec![
        (
            Box::new(|b: &[f64]| log_partial_likelihood(&sc, b).unwrap()),
            Box::new(|b: &[f64]| score_and_hessian(&sc, b).unwrap()),
        ),
        (
            Box::new(|b: &[f64]| weighted_log_likelihood(&sub, &sc, b).unwrap()),
            Box::new(|b: &[f64]| weighted_score_hessian(&sub, &sc, b).unwrap()),
        ),
    ];
    for (f, grad) in &cases {
        let (u, hess) = grad(&beta);
        for a in 0..p {
            ws = ws.max(rel(u[a], central_diff(f, &beta, a, h)));
            for b in 0..p {
                // H = −∂U/∂β
                let d = central_diff(|x: &[f64]| grad(x).0[a], &beta, b, h);
                wh = wh.max(rel(hess[(a, b)], -d));
            }
        }
    }
    check(ws <= 1e-6 && wh <= 1e-5, || {
        format!("seed {seed}: score err {ws:e}, hessian err {wh:e}")
    })?;
    Ok((ws, wh))
}
