use coxsub::rng::substream;
use coxsub::simulation::*;
use coxsub::stats::{mean, sample_sd};
use coxsub::subsampling::Method;

#[test]
fn covariate_moments() {
    let n = 200_000;
    let mut r = substream(1, &[1]);
    let z = gen_covariates(n, &mut r);
    let col = |j: usize| -> Vec<f64> { z.chunks_exact(P).map(|row| row[j]).collect() };
    let se = 4.0 / (n as f64).sqrt();
    for j in 0..3 {
        assert!(mean(&col(j)).abs() < 4.0 * se);
        assert!((sample_sd(&col(j)).unwrap() - 1.0).abs() < 0.01);
    }
    // Cov(Z1, Z2) = 0.5, Cov(Z1, Z3) = 0.25
    let cov = |a: &[f64], b: &[f64]| mean(&a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>());
    assert!((cov(&col(0), &col(1)) - 0.5).abs() < 0.01);
    assert!((cov(&col(0), &col(2)) - 0.25).abs() < 0.01);
    // Gamma(2, 1): mean 2, variance 2
    assert!((mean(&col(3)) - 2.0).abs() < 0.02);
    assert!((sample_sd(&col(3)).unwrap().powi(2) - 2.0).abs() < 0.05);
    assert!((mean(&col(4)) - 0.5).abs() < 0.01);
    assert!((mean(&col(5)) - 0.3).abs() < 0.01);
    assert!(col(4).iter().chain(&col(5)).all(|&x| x == 0.0 || x == 1.0));
}

#[test]
fn calibration_hits_target_and_is_monotone() {
    for (baseline, target) in [(Baseline::Constant(0.5), 0.3), (Baseline::Linear, 0.5)] {
        let cal = calibrate_censoring(&BETA0, baseline, target).unwrap();
        assert!((cal.achieved - target).abs() <= CALIBRATION_TOL);
        let rates: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|f| censoring_rate_at(&BETA0, baseline, cal.c * f, 100_000))
            .collect();
        assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
    }
}

#[test]
fn generated_censoring_matches_calibration() {
    let cal = calibrate_censoring(&BETA0, Baseline::Linear, 0.3).unwrap();
    let mut r = substream(4, &[2]);
    let c = gen_cohort(50_000, &BETA0, Baseline::Linear, cal.c, &mut r).unwrap();
    let rate = 1.0 - c.event_count() as f64 / c.len() as f64;
    assert!((rate - 0.3).abs() < 0.01, "{rate}");
}

fn small_config(seed: u64) -> ScenarioConfig {
    let mut c = ScenarioConfig::case(1, seed).unwrap();
    c.n = 2000;
    c.r_grid = vec![100, 200];
    c.b = 12;
    c
}

#[test]
fn scenario_is_deterministic_across_pools() {
    let config = small_config(3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_scenario(&config).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.table, b.table);
    let mut x = Vec::new();
    let mut y = Vec::new();
    a.table.write_coords_csv(&mut x).unwrap();
    b.table.write_coords_csv(&mut y).unwrap();
    assert_eq!(x, y);
    assert_eq!(a.table.cells.len(), 6);
    assert!(a.table.cells.iter().all(|c| c.failures == 0));
}

#[test]
fn metrics_table_layout() {
    let res = run_scenario(&small_config(4)).unwrap();
    let mut buf = Vec::new();
    res.table.write_summary_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "case,method,r,mse,mse_se,replicates,failures,relative_efficiency"
    );
    assert_eq!(lines.count(), 6);
    assert!(res.table.relative_efficiency(200).unwrap() > 0.0);
    let cell = res.table.cell(Method::FullOpt, 200).unwrap();
    assert_eq!(cell.coords.len(), P);
    assert_eq!(cell.replicates, 12);
}

#[test]
fn invalid_scenarios_are_rejected() {
    let mut c = small_config(1);
    c.n = 1999;
    assert!(run_scenario(&c).is_err());
    let mut c = small_config(1);
    c.b = 0;
    assert!(c.validate().is_err());
}
