//! Discrete positional PID law acting on the yaw error.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A PID gain triple. Also the search-space point for both optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainVector {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl GainVector {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.kp, self.ki, self.kd]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::new(self.kp * factor, self.ki * factor, self.kd * factor)
    }

    pub fn is_finite(&self) -> bool {
        self.kp.is_finite() && self.ki.is_finite() && self.kd.is_finite()
    }
}

impl fmt::Display for GainVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(kp={}, ki={}, kd={})", self.kp, self.ki, self.kd)
    }
}

/// Controller memory carried between samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PidState {
    /// Accumulated error, in degree-seconds.
    pub integral_acc: f64,
    /// Error at the previous sample; `None` before the first sample.
    pub prev_error: Option<f64>,
}

impl PidState {
    pub fn fresh() -> Self {
        Self::default()
    }
}

/// One controller update.
///
/// `command = kp*e + ki*I' + kd*(e - e_prev)/dt` with `I' = I + e*dt`.
/// The derivative term is zero on the first sample. No anti-windup.
pub fn pid_step(state: PidState, error: f64, gains: &GainVector, dt: f64) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    let integral_acc = state.integral_acc + error * dt;
    let derivative = match state.prev_error {
        Some(prev) => (error - prev) / dt,
        None => 0.0,
    };
    let command = gains.kp * error + gains.ki * integral_acc + gains.kd * derivative;
    (command, PidState { integral_acc, prev_error: Some(error) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pure_proportional() {
        let (u, _) = pid_step(PidState::fresh(), 10.0, &GainVector::new(2.0, 0.0, 0.0), 0.1);
        assert_eq!(u, 20.0);
    }

    #[test]
    fn integral_term_on_first_sample() {
        let (u, next) = pid_step(PidState::fresh(), 10.0, &GainVector::new(0.0, 1.0, 0.0), 0.1);
        assert!((u - 1.0).abs() < 1e-12);
        assert!((next.integral_acc - 1.0).abs() < 1e-12);
        assert_eq!(next.prev_error, Some(10.0));
    }

    #[test]
    fn derivative_vanishes_on_constant_error() {
        let state = PidState { integral_acc: 0.0, prev_error: Some(10.0) };
        let (u, _) = pid_step(state, 10.0, &GainVector::new(0.0, 0.0, 5.0), 0.1);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn first_sample_has_no_derivative_kick() {
        let (u, _) = pid_step(PidState::fresh(), 90.0, &GainVector::new(0.0, 0.0, 1.0), 0.1);
        assert_eq!(u, 0.0);
    }

    #[test]
    fn zero_error_forever_gives_zero_command() {
        let gains = GainVector::new(20.0, 0.5, 0.9);
        let mut state = PidState::fresh();
        for _ in 0..100 {
            let (u, next) = pid_step(state, 0.0, &gains, 0.1);
            assert_eq!(u, 0.0);
            state = next;
        }
    }

    #[test]
    fn integral_after_equal_error_steps() {
        // Powers of two keep the accumulation exact.
        let (error, dt) = (4.0, 0.125);
        let mut state = PidState::fresh();
        for n in 1..=64 {
            state = pid_step(state, error, &GainVector::new(1.0, 1.0, 1.0), dt).1;
            assert_eq!(state.integral_acc, n as f64 * error * dt);
        }
    }

    proptest! {
        #[test]
        fn command_is_linear_in_gains(
            kp in 0.0..25.0f64, ki in 0.0..1.0f64, kd in 0.0..1.0f64,
            a in -4.0..4.0f64,
            acc in -100.0..100.0f64,
            prev in proptest::option::of(-180.0..180.0f64),
            error in -180.0..180.0f64,
        ) {
            let state = PidState { integral_acc: acc, prev_error: prev };
            let gains = GainVector::new(kp, ki, kd);
            let (u, _) = pid_step(state, error, &gains, 0.1);
            let (ua, _) = pid_step(state, error, &gains.scaled(a), 0.1);
            prop_assert!((ua - a * u).abs() <= 1e-9 * (1.0 + u.abs() * a.abs()));
        }
    }
}
