//! Step-response metrics and the acceptance predicate applied after every
//! experiment.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fraction of the setpoint that counts as "risen".
pub const RISE_FRACTION: f64 = 0.9;
/// Half-width of the settling band, as a fraction of the setpoint.
pub const SETTLING_BAND: f64 = 0.05;
/// Number of trailing samples averaged for the steady-state error.
pub const STEADY_STATE_WINDOW: usize = 5;
/// Fitness added per violated acceptance condition, on top of the horizon.
pub const PENALTY_PER_VIOLATION_MS: f64 = 1000.0;

/// Yaw samples from one rotation, sample `i` taken at `i * dt_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTrace {
    dt_ms: u64,
    setpoint: f64,
    samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    commands: Vec<f64>,
}

impl ExperimentTrace {
    pub fn new(dt_ms: u64, setpoint: f64, samples: Vec<f64>) -> Result<Self> {
        Self::with_commands(dt_ms, setpoint, samples, Vec::new())
    }

    /// Trace that also carries the saturated command applied at each tick.
    pub fn with_commands(dt_ms: u64, setpoint: f64, samples: Vec<f64>, commands: Vec<f64>) -> Result<Self> {
        if dt_ms == 0 {
            return Err(Error::InvalidParameter("trace dt_ms must be positive".into()));
        }
        if samples.len() < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: samples.len() });
        }
        Ok(Self { dt_ms, setpoint, samples, commands })
    }

    pub fn dt_ms(&self) -> u64 {
        self.dt_ms
    }

    pub fn setpoint(&self) -> f64 {
        self.setpoint
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn commands(&self) -> &[f64] {
        &self.commands
    }

    pub fn duration_ms(&self) -> u64 {
        (self.samples.len() as u64 - 1) * self.dt_ms
    }

    fn time_of(&self, index: usize) -> u64 {
        index as u64 * self.dt_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub rise_time_ms: Option<u64>,
    pub overshoot_pct: f64,
    pub settling_time_ms: Option<u64>,
    pub steady_state_error_deg: f64,
}

impl StepMetrics {
    pub fn from_trace(trace: &ExperimentTrace) -> Result<Self> {
        Ok(Self {
            rise_time_ms: rise_time(trace),
            overshoot_pct: overshoot_pct(trace),
            settling_time_ms: settling_time(trace),
            steady_state_error_deg: steady_state_error(trace)?,
        })
    }
}

/// Time of the first sample at or above 90% of the setpoint.
pub fn rise_time(trace: &ExperimentTrace) -> Option<u64> {
    let threshold = RISE_FRACTION * trace.setpoint;
    trace.samples.iter().position(|&s| s >= threshold).map(|i| trace.time_of(i))
}

/// Peak excess over the setpoint in percent, clamped at zero.
pub fn overshoot_pct(trace: &ExperimentTrace) -> f64 {
    let peak = trace.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ((peak - trace.setpoint) * 100.0 / trace.setpoint).max(0.0)
}

/// Earliest sample time after which every sample stays inside the closed
/// ±5% band. `None` when the final sample is outside it.
pub fn settling_time(trace: &ExperimentTrace) -> Option<u64> {
    let lo = (1.0 - SETTLING_BAND) * trace.setpoint;
    let hi = (1.0 + SETTLING_BAND) * trace.setpoint;
    let inside = |s: f64| s >= lo && s <= hi;
    let settled_tail = trace.samples.iter().rev().take_while(|&&s| inside(s)).count();
    if settled_tail == 0 {
        return None;
    }
    Some(trace.time_of(trace.samples.len() - settled_tail))
}

/// `setpoint - mean(last 5 samples)`, signed.
pub fn steady_state_error(trace: &ExperimentTrace) -> Result<f64> {
    let n = trace.samples.len();
    if n < STEADY_STATE_WINDOW {
        return Err(Error::TooFewSamples { needed: STEADY_STATE_WINDOW, got: n });
    }
    let tail = &trace.samples[n - STEADY_STATE_WINDOW..];
    Ok(trace.setpoint - tail.iter().sum::<f64>() / STEADY_STATE_WINDOW as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub max_overshoot_pct: f64,
    pub max_rise_time_ms: f64,
}

impl Default for Constraints {
    fn default() -> Self {
        Self { max_overshoot_pct: 30.0, max_rise_time_ms: 1000.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accepted: bool,
    /// Settling time when accepted, otherwise a penalty above the horizon.
    pub fitness: f64,
    /// Accepted and settled at or below the objective threshold.
    pub converged: bool,
    pub violations: u32,
    pub metrics: StepMetrics,
}

/// Acceptance predicate plus penalty fitness.
///
/// Accepted iff overshoot, rise time and settling all satisfy the limits.
/// A rejected trace scores `duration + 1000 * violations`, which is
/// strictly worse than any accepted settling time on the same horizon.
pub fn evaluate(trace: &ExperimentTrace, constraints: &Constraints, objective_threshold_ms: f64) -> Result<Evaluation> {
    let metrics = StepMetrics::from_trace(trace)?;
    Ok(evaluate_metrics(&metrics, trace.duration_ms(), constraints, objective_threshold_ms))
}

pub fn evaluate_metrics(
    metrics: &StepMetrics,
    duration_ms: u64,
    constraints: &Constraints,
    objective_threshold_ms: f64,
) -> Evaluation {
    let overshoot_ok = metrics.overshoot_pct <= constraints.max_overshoot_pct;
    let rise_ok = metrics.rise_time_ms.is_some_and(|r| r as f64 <= constraints.max_rise_time_ms);
    let settled = metrics.settling_time_ms.is_some();
    let violations = [overshoot_ok, rise_ok, settled].iter().filter(|ok| !**ok).count() as u32;
    let accepted = violations == 0;
    let fitness = match (accepted, metrics.settling_time_ms) {
        (true, Some(settling)) => settling as f64,
        _ => duration_ms as f64 + PENALTY_PER_VIOLATION_MS * violations as f64,
    };
    let converged = accepted && fitness <= objective_threshold_ms;
    Evaluation { accepted, fitness, converged, violations, metrics: *metrics }
}
