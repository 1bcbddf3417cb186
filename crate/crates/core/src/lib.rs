//! PID auto-tuning workbench.
//!
//! A configurations generator crosses initial PID gain states with
//! exploration/exploitation levels; a trials executer then tunes each
//! configuration with differential evolution or Bayesian optimization
//! against a simulated robot yaw plant, minimizing settling time subject
//! to overshoot and rise-time constraints.
//!
//! Module map:
//!
//! - [`plant`]: discrete-time yaw dynamics and closed-loop experiments.
//! - [`pid`]: the discrete PID law.
//! - [`metrics`]: step-response metrics and the acceptance predicate.
//! - [`de`]: rand/1/bin differential evolution.
//! - [`bo`]: Gaussian-process surrogate and expected improvement.
//! - [`trials`]: configuration generation and trial execution.
//! - [`report`]: summaries, kernel density curves and exports.
//! - [`cli`]: the `pidtune` command-line front end.

pub mod bo;
pub mod cli;
pub mod de;
mod error;
pub mod metrics;
pub mod optim;
pub mod pid;
pub mod plant;
pub mod report;
pub mod rng;
pub mod trials;

pub use error::{Error, Result};
pub use metrics::{Evaluation, ExperimentTrace, StepMetrics};
pub use optim::{Bounds, EvalRecord, Observation, OptRun};
pub use pid::GainVector;
pub use plant::{ExperimentParams, PlantParams};
pub use trials::{OptimizerKind, RobotKind, TrialConfig, TrialResult};
