//! Trial-matrix config file (TOML).
//!
//! ```toml
//! seeds = [0]
//! optimizers = ["de", "bo"]
//! budget = 150
//! objective_threshold_ms = 2500
//!
//! [constraints]
//! max_overshoot_pct = 30
//! max_rise_time_ms = 1000
//!
//! [[robots]]
//! kind = "ddrm"
//! duration_ms = 5000
//! inertia = 1.0
//! damping = 3.0
//! command_limit = 1000.0
//!
//! [[initial_states]]
//! label = "high-p-low-i-low-d"
//! gains = [20.0, 0.05, 0.05]
//!
//! [[eecs]]
//! id = 0
//! label = "balanced"
//! mutation_f = 0.6
//! crossover_cr = 0.6
//! xi = 0.1
//! ```
//!
//! Every top-level key is optional and falls back to the built-in default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    generate_configs, BoSettings, DeSettings, EecLevel, InitialState, OptimizerKind, PlantRegistry, RobotKind,
    RobotSetup, TrialConfig, TrialSettings,
};
use crate::metrics::Constraints;
use crate::optim::Bounds;
use crate::pid::GainVector;
use crate::plant::{ExperimentParams, PlantParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotEntry {
    pub kind: RobotKind,
    pub duration_ms: u64,
    pub inertia: f64,
    pub damping: f64,
    pub command_limit: f64,
    #[serde(default)]
    pub noise_std: f64,
}

impl RobotEntry {
    fn from_setup(kind: RobotKind, setup: &RobotSetup) -> Self {
        Self {
            kind,
            duration_ms: setup.experiment.duration_ms,
            inertia: setup.plant.inertia,
            damping: setup.plant.damping,
            command_limit: setup.plant.command_limit,
            noise_std: setup.plant.noise_std,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub setpoint: f64,
    pub dt_ms: u64,
    pub abort_angle: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        let e = ExperimentParams::with_duration(5000);
        Self { setpoint: e.setpoint, dt_ms: e.dt_ms, abort_angle: e.abort_angle }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateEntry {
    #[serde(default)]
    pub id: Option<u32>,
    pub label: String,
    pub gains: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkbenchConfig {
    pub seeds: Vec<u64>,
    pub optimizers: Vec<OptimizerKind>,
    pub budget: usize,
    pub objective_threshold_ms: f64,
    pub constraints: Constraints,
    pub bounds: Bounds,
    pub experiment: ExperimentSection,
    pub robots: Vec<RobotEntry>,
    pub initial_states: Vec<InitialStateEntry>,
    pub eecs: Vec<EecLevel>,
    pub de: DeSettings,
    pub bo: BoSettings,
}

impl Default for WorkbenchConfig {
    fn default() -> Self {
        let settings = TrialSettings::default();
        Self {
            seeds: vec![0],
            optimizers: OptimizerKind::ALL.to_vec(),
            budget: settings.budget,
            objective_threshold_ms: settings.objective_threshold_ms,
            constraints: settings.constraints,
            bounds: settings.bounds,
            experiment: ExperimentSection::default(),
            robots: RobotKind::ALL.iter().map(|&k| RobotEntry::from_setup(k, &k.default_setup())).collect(),
            initial_states: InitialState::defaults()
                .into_iter()
                .map(|s| InitialStateEntry { id: Some(s.id), label: s.label, gains: s.gains.to_array() })
                .collect(),
            eecs: EecLevel::defaults(),
            de: settings.de,
            bo: settings.bo,
        }
    }
}

impl WorkbenchConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::Config(format!("`{key}`: {why}")));
        if let Err(e) = self.bounds.validate() {
            return bad("bounds", e.to_string());
        }
        for (i, robot) in self.robots.iter().enumerate() {
            let setup = self.setup_for(robot);
            if let Err(e) = setup.plant.validate().and(setup.experiment.validate()) {
                return bad(&format!("robots[{i}]"), e.to_string());
            }
        }
        let mut kinds: Vec<_> = self.robots.iter().map(|r| r.kind).collect();
        kinds.sort();
        if kinds.windows(2).any(|w| w[0] == w[1]) {
            return bad("robots", "duplicate robot kind".into());
        }
        for (i, state) in self.initial_states.iter().enumerate() {
            if !self.bounds.contains(&GainVector::from_array(state.gains)) {
                return bad(&format!("initial_states[{i}].gains"), format!("{:?} outside bounds", state.gains));
            }
        }
        for (i, eec) in self.eecs.iter().enumerate() {
            if !(eec.mutation_f > 0.0 && eec.mutation_f <= 2.0) {
                return bad(&format!("eecs[{i}].mutation_f"), format!("{} not in (0, 2]", eec.mutation_f));
            }
            if !(0.0..=1.0).contains(&eec.crossover_cr) {
                return bad(&format!("eecs[{i}].crossover_cr"), format!("{} not in [0, 1]", eec.crossover_cr));
            }
            if eec.xi < 0.0 {
                return bad(&format!("eecs[{i}].xi"), format!("{} is negative", eec.xi));
            }
        }
        if self.budget == 0 {
            return bad("budget", "must be positive".into());
        }
        if self.optimizers.contains(&OptimizerKind::De) && self.budget < self.de.pop_size {
            return bad("budget", format!("smaller than DE population {}", self.de.pop_size));
        }
        if self.de.pop_size < 4 {
            return bad("de.pop_size", "must be at least 4".into());
        }
        if self.objective_threshold_ms.is_nan() || self.objective_threshold_ms <= 0.0 {
            return bad("objective_threshold_ms", "must be positive".into());
        }
        if !(self.constraints.max_overshoot_pct > 0.0 && self.constraints.max_rise_time_ms > 0.0) {
            return bad("constraints", "limits must be positive".into());
        }
        Ok(())
    }

    fn setup_for(&self, robot: &RobotEntry) -> RobotSetup {
        RobotSetup {
            plant: PlantParams {
                inertia: robot.inertia,
                damping: robot.damping,
                command_limit: robot.command_limit,
                noise_std: robot.noise_std,
            },
            experiment: ExperimentParams {
                setpoint: self.experiment.setpoint,
                duration_ms: robot.duration_ms,
                dt_ms: self.experiment.dt_ms,
                abort_angle: self.experiment.abort_angle,
            },
        }
    }

    pub fn registry(&self) -> PlantRegistry {
        self.robots.iter().map(|r| (r.kind, self.setup_for(r))).collect()
    }

    pub fn settings(&self) -> TrialSettings {
        TrialSettings {
            budget: self.budget,
            objective_threshold_ms: self.objective_threshold_ms,
            constraints: self.constraints,
            bounds: self.bounds,
            de: self.de,
            bo: self.bo,
        }
    }

    /// Initial states with ids assigned in file order (1-based) where absent.
    pub fn initial_states(&self) -> Vec<InitialState> {
        self.initial_states
            .iter()
            .enumerate()
            .map(|(i, s)| InitialState {
                id: s.id.unwrap_or(i as u32 + 1),
                label: s.label.clone(),
                gains: GainVector::from_array(s.gains),
            })
            .collect()
    }

    pub fn robot_kinds(&self) -> Vec<RobotKind> {
        self.robots.iter().map(|r| r.kind).collect()
    }

    pub fn generate(&self) -> Vec<TrialConfig> {
        generate_configs(
            &self.eecs,
            &self.initial_states(),
            &self.optimizers,
            &self.robot_kinds(),
            &self.seeds,
            &self.settings(),
        )
    }
}

/// Generated trial list plus the plants it refers to; the file `run`
/// consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMatrix {
    pub plants: PlantRegistry,
    pub trials: Vec<TrialConfig>,
}

impl TrialMatrix {
    pub fn from_config(config: &WorkbenchConfig) -> Self {
        Self { plants: config.registry(), trials: config.generate() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = WorkbenchConfig::default();
        assert_eq!(WorkbenchConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
        assert_eq!(c.generate().len(), 24);
    }

    #[test]
    fn empty_document_means_defaults() {
        assert_eq!(WorkbenchConfig::from_toml_str("").unwrap(), WorkbenchConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = WorkbenchConfig::from_toml_str("budgett = 10").unwrap_err().to_string();
        assert!(err.contains("budgett"), "{err}");
    }

    #[test]
    fn bad_value_is_named() {
        let text = "[[eecs]]\nid = 0\nlabel = \"x\"\nmutation_f = 3.0\ncrossover_cr = 0.5\nxi = 0.1\n";
        let err = WorkbenchConfig::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("eecs[0].mutation_f"), "{err}");
        let err = WorkbenchConfig::from_toml_str("[[initial_states]]\nlabel = \"x\"\ngains = [30.0, 0.0, 0.0]\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("initial_states[0].gains"), "{err}");
    }

    #[test]
    fn unknown_robot_kind_is_rejected() {
        let text =
            "[[robots]]\nkind = \"hexapod\"\nduration_ms = 5000\ninertia = 1.0\ndamping = 1.0\ncommand_limit = 10.0\n";
        assert!(WorkbenchConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn registry_uses_per_robot_horizon() {
        let reg = WorkbenchConfig::default().registry();
        assert_eq!(reg[&RobotKind::Ddrm].experiment.duration_ms, 5000);
        assert_eq!(reg[&RobotKind::Omnidirectional].experiment.duration_ms, 10_000);
        assert_eq!(reg[&RobotKind::Omnidirectional].plant, PlantParams::OMNIDIRECTIONAL);
    }
}
