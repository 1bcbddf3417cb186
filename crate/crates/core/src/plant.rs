//! Yaw dynamics of the two robot archetypes and the closed-loop rotation
//! experiment.
//!
//! The plant is a saturated second-order system integrated with explicit
//! Euler at the sampling interval:
//!
//! ```text
//! u      = clamp(command, -limit, limit)
//! omega' = omega + dt * (u - damping * omega) / inertia
//! theta' = theta + dt * omega
//! ```

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::metrics::ExperimentTrace;
use crate::pid::{pid_step, GainVector, PidState};
use crate::rng::{self, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub inertia: f64,
    pub damping: f64,
    pub command_limit: f64,
    /// Std of the yaw measurement noise, degrees.
    #[serde(default)]
    pub noise_std: f64,
}

impl PlantParams {
    /// Differential-drive robot.
    pub const DDRM: PlantParams = PlantParams { inertia: 1.0, damping: 3.0, command_limit: 1000.0, noise_std: 0.0 };

    /// Omnidirectional robot: heavier and slower to settle.
    pub const OMNIDIRECTIONAL: PlantParams =
        PlantParams { inertia: 2.0, damping: 4.5, command_limit: 1000.0, noise_std: 0.0 };

    pub fn validate(&self) -> Result<()> {
        let ok = self.inertia.is_finite()
            && self.inertia > 0.0
            && self.damping.is_finite()
            && self.damping >= 0.0
            && self.command_limit.is_finite()
            && self.command_limit > 0.0
            && self.noise_std.is_finite()
            && self.noise_std >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("plant parameters {self:?}")))
        }
    }

    pub fn saturate(&self, command: f64) -> f64 {
        command.clamp(-self.command_limit, self.command_limit)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// Yaw angle, degrees.
    pub theta: f64,
    /// Yaw rate, degrees per second.
    pub omega: f64,
}

impl PlantState {
    fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.omega.is_finite()
    }
}

/// One Euler step. `dt` in seconds.
pub fn step(state: PlantState, command: f64, params: &PlantParams, dt: f64) -> Result<PlantState> {
    if !state.is_finite() || !command.is_finite() {
        return Err(Error::Divergence { time_ms: 0, theta: state.theta, omega: state.omega });
    }
    let u = params.saturate(command);
    let omega = state.omega + dt * (u - params.damping * state.omega) / params.inertia;
    let theta = state.theta + dt * state.omega;
    let next = PlantState { theta, omega };
    if !next.is_finite() {
        return Err(Error::Divergence { time_ms: 0, theta, omega });
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    /// Target yaw, degrees.
    pub setpoint: f64,
    pub duration_ms: u64,
    pub dt_ms: u64,
    /// Informal yaw ceiling. Not enforced during the run.
    pub abort_angle: f64,
}

impl ExperimentParams {
    pub const fn with_duration(duration_ms: u64) -> Self {
        Self { setpoint: 90.0, duration_ms, dt_ms: 100, abort_angle: 120.0 }
    }

    pub fn ticks(&self) -> usize {
        (self.duration_ms / self.dt_ms) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt_ms == 0 || self.duration_ms == 0 || !self.duration_ms.is_multiple_of(self.dt_ms) {
            return Err(Error::InvalidParameter(format!(
                "duration {} ms must be a positive multiple of dt {} ms",
                self.duration_ms, self.dt_ms
            )));
        }
        if !(self.setpoint > 0.0 && self.setpoint < self.abort_angle) {
            return Err(Error::InvalidParameter(format!(
                "setpoint {} must lie in (0, abort angle {})",
                self.setpoint, self.abort_angle
            )));
        }
        Ok(())
    }
}

/// Simulate one in-place rotation from rest at zero yaw.
///
/// Each tick measures the yaw (true yaw plus Gaussian noise when
/// `noise_std > 0`), runs the PID law on `setpoint - measured`, and steps
/// the plant. The returned trace holds the true yaw at every sample,
/// `duration_ms / dt_ms + 1` of them, plus the saturated command applied
/// at each tick.
pub fn run_experiment(
    gains: &GainVector,
    plant: &PlantParams,
    exp: &ExperimentParams,
    rng_seed: u64,
) -> Result<ExperimentTrace> {
    plant.validate()?;
    exp.validate()?;
    let dt = exp.dt_ms as f64 / 1000.0;
    let ticks = exp.ticks();
    let mut noise = (plant.noise_std > 0.0).then(|| {
        let dist = Normal::new(0.0, plant.noise_std).expect("validated noise std");
        (dist, rng::stream(rng_seed, Stream::PlantNoise))
    });

    let mut samples = Vec::with_capacity(ticks + 1);
    let mut commands = Vec::with_capacity(ticks);
    let mut state = PlantState::default();
    let mut pid = PidState::fresh();
    samples.push(state.theta);
    for tick in 0..ticks {
        let measured = match noise.as_mut() {
            Some((dist, rng)) => state.theta + dist.sample(rng),
            None => state.theta,
        };
        let (command, next_pid) = pid_step(pid, exp.setpoint - measured, gains, dt);
        pid = next_pid;
        state = step(state, command, plant, dt).map_err(|e| match e {
            Error::Divergence { theta, omega, .. } => {
                Error::Divergence { time_ms: (tick as u64 + 1) * exp.dt_ms, theta, omega }
            }
            other => other,
        })?;
        commands.push(plant.saturate(command));
        samples.push(state.theta);
    }
    ExperimentTrace::with_commands(exp.dt_ms, exp.setpoint, samples, commands)
}
