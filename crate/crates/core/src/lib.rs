//! Cox proportional hazards regression for massive right-censored data via
//! two-stage optimal subsampling.
//!
//! * [`data`]: survival records, CSV ingestion, the time-sorted cohort.
//! * [`cox`]: full-data partial likelihood, Newton solver, Breslow estimator.
//! * [`subsampling`]: q-scores, Uniform / Cen-opt / Full-opt probabilities,
//!   with-replacement draws and the pilot stage.
//! * [`weighted`]: weighted estimating equation, sandwich variance, weighted
//!   Breslow estimator and the end-to-end two-stage driver.
//! * [`simulation`]: synthetic scenarios and the Monte Carlo harness.
//! * [`cli`]: the `coxsub` command-line front end.

pub mod cli;
pub mod cox;
pub mod data;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod simulation;
pub mod stats;
pub mod subsampling;
pub mod weighted;

pub use cox::{BaselineHazard, CoxFit, RiskSetSums, SolverOptions};
pub use data::{Cohort, CsvSchema, SortedCohort, SurvivalRecord};
pub use error::{CoxError, Result};
pub use subsampling::{Method, Subsample, SubsamplingPlan};
pub use weighted::{WeightedBaseline, WeightedFit};
