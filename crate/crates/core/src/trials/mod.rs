//! Configurations generator and trials executer.
//!
//! [`generate_configs`] takes the Cartesian product of exploration levels,
//! initial gain states, optimizers, robots and seeds. [`execute_trial`]
//! wires the simulated rotation experiment and the acceptance predicate
//! into an objective and hands it to the selected optimizer, stopping at
//! the first evaluation that is accepted and settles within the threshold.

mod config;
mod log;

pub use config::{ExperimentSection, InitialStateEntry, RobotEntry, TrialMatrix, WorkbenchConfig};
pub use log::{write_trial_log, write_trial_log_file, TRIAL_LOG_HEADER};

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bo::{bo_run, BoConfig};
use crate::de::{de_run, DeConfig};
use crate::metrics::{evaluate, Constraints, StepMetrics};
use crate::optim::{Bounds, Observation};
use crate::pid::GainVector;
use crate::plant::{run_experiment, ExperimentParams, PlantParams};
use crate::rng::{self, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    De,
    Bo,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 2] = [OptimizerKind::De, OptimizerKind::Bo];

    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::De => "de",
            OptimizerKind::Bo => "bo",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotKind {
    /// Differential-drive robot.
    Ddrm,
    #[serde(alias = "omni")]
    Omnidirectional,
}

impl RobotKind {
    pub const ALL: [RobotKind; 2] = [RobotKind::Ddrm, RobotKind::Omnidirectional];

    pub fn as_str(self) -> &'static str {
        match self {
            RobotKind::Ddrm => "ddrm",
            RobotKind::Omnidirectional => "omnidirectional",
        }
    }

    pub fn default_setup(self) -> RobotSetup {
        match self {
            RobotKind::Ddrm => {
                RobotSetup { plant: PlantParams::DDRM, experiment: ExperimentParams::with_duration(5000) }
            }
            RobotKind::Omnidirectional => {
                RobotSetup { plant: PlantParams::OMNIDIRECTIONAL, experiment: ExperimentParams::with_duration(10_000) }
            }
        }
    }
}

impl fmt::Display for RobotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RobotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ddrm" => Ok(RobotKind::Ddrm),
            "omni" | "omnidirectional" => Ok(RobotKind::Omnidirectional),
            other => Err(Error::UnknownRobot(other.to_owned())),
        }
    }
}

/// Plant and experiment horizon for one robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSetup {
    pub plant: PlantParams,
    pub experiment: ExperimentParams,
}

pub type PlantRegistry = BTreeMap<RobotKind, RobotSetup>;

pub fn default_registry() -> PlantRegistry {
    RobotKind::ALL.iter().map(|&r| (r, r.default_setup())).collect()
}

/// Exploration/exploitation level: one DE (F, CR) pair and one EI `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EecLevel {
    pub id: u32,
    pub label: String,
    pub mutation_f: f64,
    pub crossover_cr: f64,
    pub xi: f64,
}

impl EecLevel {
    pub fn defaults() -> Vec<EecLevel> {
        let level = |id, label: &str, mutation_f, crossover_cr, xi| EecLevel {
            id,
            label: label.to_owned(),
            mutation_f,
            crossover_cr,
            xi,
        };
        vec![
            level(0, "balanced", 0.6, 0.6, 0.1),
            level(1, "exploration-focused", 0.8, 0.3, 0.2),
            level(2, "exploitation-focused", 0.5, 0.9, 0.01),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub id: u32,
    pub label: String,
    pub gains: GainVector,
}

impl InitialState {
    pub fn defaults() -> Vec<InitialState> {
        vec![
            InitialState { id: 1, label: "high-p-low-i-low-d".into(), gains: GainVector::new(20.0, 0.05, 0.05) },
            InitialState { id: 2, label: "high-p-low-i-high-d".into(), gains: GainVector::new(20.0, 0.05, 0.9) },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeSettings {
    pub pop_size: usize,
    pub tol: f64,
    pub atol: f64,
}

impl Default for DeSettings {
    fn default() -> Self {
        let d = DeConfig::default();
        Self { pop_size: d.pop_size, tol: d.tol, atol: d.atol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoSettings {
    pub kernel_length_scale: f64,
    pub signal_variance: f64,
    pub jitter: f64,
    pub candidate_count: usize,
}

impl Default for BoSettings {
    fn default() -> Self {
        let d = BoConfig::default();
        Self {
            kernel_length_scale: d.kernel_length_scale,
            signal_variance: d.signal_variance,
            jitter: d.jitter,
            candidate_count: d.candidate_count,
        }
    }
}

/// Settings shared by every trial of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSettings {
    pub budget: usize,
    pub objective_threshold_ms: f64,
    pub constraints: Constraints,
    pub bounds: Bounds,
    pub de: DeSettings,
    pub bo: BoSettings,
}

impl Default for TrialSettings {
    fn default() -> Self {
        Self {
            budget: 150,
            objective_threshold_ms: 2500.0,
            constraints: Constraints::default(),
            bounds: Bounds::default(),
            de: DeSettings::default(),
            bo: BoSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub optimizer: OptimizerKind,
    pub eec: EecLevel,
    pub initial_state: InitialState,
    pub robot: RobotKind,
    pub seed: u64,
    #[serde(flatten)]
    pub settings: TrialSettings,
}

impl TrialConfig {
    pub fn de_config(&self) -> DeConfig {
        DeConfig {
            mutation_f: self.eec.mutation_f,
            crossover_cr: self.eec.crossover_cr,
            pop_size: self.settings.de.pop_size,
            budget: self.settings.budget,
            tol: self.settings.de.tol,
            atol: self.settings.de.atol,
        }
    }

    pub fn bo_config(&self) -> BoConfig {
        let bo = &self.settings.bo;
        BoConfig {
            xi: self.eec.xi,
            budget: self.settings.budget,
            kernel_length_scale: bo.kernel_length_scale,
            signal_variance: bo.signal_variance,
            jitter: bo.jitter,
            candidate_count: bo.candidate_count,
        }
    }

    /// Short file-name-safe identifier, unique within a generated matrix.
    pub fn slug(&self) -> String {
        format!("{}_eec{}_init{}_{}_seed{}", self.robot, self.eec.id, self.initial_state.id, self.optimizer, self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        s.bounds.validate()?;
        s.bounds.check(&self.initial_state.gains)?;
        if s.budget == 0 {
            return Err(Error::InvalidParameter("budget must be positive".into()));
        }
        if !(s.constraints.max_overshoot_pct > 0.0
            && s.constraints.max_rise_time_ms > 0.0
            && s.objective_threshold_ms > 0.0)
        {
            return Err(Error::InvalidParameter("constraints and threshold must be positive".into()));
        }
        match self.optimizer {
            OptimizerKind::De => self.de_config().validate(),
            OptimizerKind::Bo => self.bo_config().validate(),
        }
    }
}

/// Full Cartesian product, ordered eec-major, then initial state,
/// optimizer, robot, seed.
pub fn generate_configs(
    eecs: &[EecLevel],
    initial_states: &[InitialState],
    optimizers: &[OptimizerKind],
    robots: &[RobotKind],
    seeds: &[u64],
    settings: &TrialSettings,
) -> Vec<TrialConfig> {
    let mut out = Vec::with_capacity(eecs.len() * initial_states.len() * optimizers.len() * robots.len() * seeds.len());
    for eec in eecs {
        for state in initial_states {
            for &optimizer in optimizers {
                for &robot in robots {
                    for &seed in seeds {
                        out.push(TrialConfig {
                            optimizer,
                            eec: eec.clone(),
                            initial_state: state.clone(),
                            robot,
                            seed,
                            settings: *settings,
                        });
                    }
                }
            }
        }
    }
    out
}

/// One experiment within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialEval {
    pub eval_index: usize,
    pub gains: GainVector,
    pub metrics: StepMetrics,
    pub accepted: bool,
    pub fitness: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub config: TrialConfig,
    pub converged: bool,
    pub eval_count: usize,
    pub wall_time_ms: f64,
    pub best_gains: Option<GainVector>,
    pub best_fitness: Option<f64>,
    pub best_metrics: Option<StepMetrics>,
    /// Diagnostic when the trial aborted on an error.
    pub failure: Option<String>,
    pub history: Vec<TrialEval>,
}

impl TrialResult {
    fn from_history(config: TrialConfig, history: Vec<TrialEval>, failure: Option<String>, wall_time_ms: f64) -> Self {
        let best = history.iter().fold(None::<&TrialEval>, |best, e| match best {
            Some(b) if b.fitness <= e.fitness => Some(b),
            _ => Some(e),
        });
        Self {
            converged: failure.is_none() && history.last().is_some_and(|e| e.converged),
            eval_count: history.len(),
            wall_time_ms,
            best_gains: best.map(|e| e.gains),
            best_fitness: best.map(|e| e.fitness),
            best_metrics: best.map(|e| e.metrics),
            failure,
            config,
            history,
        }
    }

    /// Copy with the wall-clock field zeroed, for reproducibility checks.
    pub fn without_wall_time(&self) -> Self {
        Self { wall_time_ms: 0.0, ..self.clone() }
    }

    pub fn is_failure(&self) -> bool {
        self.failure.is_some()
    }
}

/// Run one trial to convergence or budget. Errors are captured in the
/// result's `failure` field.
pub fn execute_trial(config: &TrialConfig, registry: &PlantRegistry) -> TrialResult {
    let start = Instant::now();
    let mut history = Vec::new();
    let outcome = run_trial(config, registry, &mut history);
    let elapsed = start.elapsed().as_secs_f64() * 1000.0;
    TrialResult::from_history(config.clone(), history, outcome.err().map(|e| e.to_string()), elapsed)
}

fn run_trial(config: &TrialConfig, registry: &PlantRegistry, history: &mut Vec<TrialEval>) -> Result<()> {
    config.validate()?;
    let setup = registry.get(&config.robot).ok_or_else(|| Error::UnknownRobot(config.robot.to_string()))?;
    let settings = &config.settings;
    let threshold = settings.objective_threshold_ms;
    let mut noise_seeds = rng::stream(config.seed, Stream::PlantNoise);

    let objective = |gains: &GainVector| -> Result<Observation> {
        let trace = run_experiment(gains, &setup.plant, &setup.experiment, noise_seeds.next_u64())?;
        let eval = evaluate(&trace, &settings.constraints, threshold)?;
        history.push(TrialEval {
            eval_index: history.len(),
            gains: *gains,
            metrics: eval.metrics,
            accepted: eval.accepted,
            fitness: eval.fitness,
            converged: eval.converged,
        });
        Ok(Observation { fitness: eval.fitness, accepted: eval.accepted })
    };
    let stop = |o: &Observation| o.accepted && o.fitness <= threshold;

    let bounds = &settings.bounds;
    let init = config.initial_state.gains;
    match config.optimizer {
        OptimizerKind::De => de_run(objective, bounds, &config.de_config(), init, config.seed, stop)?,
        OptimizerKind::Bo => bo_run(objective, bounds, &config.bo_config(), init, config.seed, stop)?,
    };
    Ok(())
}

/// Execute every config, fanning out across up to `parallelism` threads.
/// Output order matches input order.
pub fn run_batch(configs: &[TrialConfig], registry: &PlantRegistry, parallelism: usize) -> Vec<TrialResult> {
    if parallelism <= 1 || configs.len() <= 1 {
        return configs.iter().map(|c| execute_trial(c, registry)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(parallelism).build().expect("thread pool");
    pool.install(|| configs.par_iter().map(|c| execute_trial(c, registry)).collect())
}
