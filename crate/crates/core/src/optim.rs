//! Types shared by the two optimizers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pid::GainVector;
use crate::{Error, Result};

/// Axis-aligned search box over (kp, ki, kd).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub kp: [f64; 2],
    pub ki: [f64; 2],
    pub kd: [f64; 2],
}

impl Default for Bounds {
    fn default() -> Self {
        Self { kp: [1.0, 25.0], ki: [0.0, 1.0], kd: [0.0, 1.0] }
    }
}

impl Bounds {
    pub fn lower(&self) -> [f64; 3] {
        [self.kp[0], self.ki[0], self.kd[0]]
    }

    pub fn upper(&self) -> [f64; 3] {
        [self.kp[1], self.ki[1], self.kd[1]]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!("bounds for {name}: [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, g: &GainVector) -> bool {
        let (lo, hi) = (self.lower(), self.upper());
        g.to_array().iter().enumerate().all(|(i, v)| *v >= lo[i] && *v <= hi[i])
    }

    pub fn check(&self, g: &GainVector) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { gains: *g })
        }
    }

    pub fn clip(&self, g: GainVector) -> GainVector {
        let (lo, hi) = (self.lower(), self.upper());
        let a = g.to_array();
        GainVector::from_array(std::array::from_fn(|i| a[i].clamp(lo[i], hi[i])))
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> GainVector {
        let (lo, hi) = (self.lower(), self.upper());
        GainVector::from_array(std::array::from_fn(|i| lo[i] + rng.random::<f64>() * (hi[i] - lo[i])))
    }

    /// Map into the unit cube.
    pub fn normalize(&self, g: &GainVector) -> [f64; 3] {
        let (lo, hi) = (self.lower(), self.upper());
        let a = g.to_array();
        std::array::from_fn(|i| (a[i] - lo[i]) / (hi[i] - lo[i]))
    }

    pub fn denormalize(&self, u: &[f64; 3]) -> GainVector {
        let (lo, hi) = (self.lower(), self.upper());
        GainVector::from_array(std::array::from_fn(|i| (lo[i] + u[i] * (hi[i] - lo[i])).clamp(lo[i], hi[i])))
    }
}

/// What the caller's objective reports for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub fitness: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub gains: GainVector,
    pub fitness: f64,
    pub accepted: bool,
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRun {
    pub best_gains: GainVector,
    pub best_fitness: f64,
    /// True when the caller's stop predicate fired.
    pub stopped_early: bool,
    pub history: Vec<EvalRecord>,
}

impl OptRun {
    /// Best fitness seen after each evaluation.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.history
            .iter()
            .scan(f64::INFINITY, |best, r| {
                *best = best.min(r.fitness);
                Some(*best)
            })
            .collect()
    }
}

/// Bookkeeping common to both optimizers: calls the objective, validates
/// the fitness, records history, tracks the incumbent, and answers whether
/// the run must stop.
pub(crate) struct Ledger<'a, O, S> {
    objective: O,
    stop: S,
    budget: usize,
    history: Vec<EvalRecord>,
    best: Option<(GainVector, f64)>,
    stopped_early: bool,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl<'a, O, S> Ledger<'a, O, S>
where
    O: FnMut(&GainVector) -> Result<Observation>,
    S: Fn(&Observation) -> bool,
{
    pub(crate) fn new(objective: O, stop: S, budget: usize) -> Self {
        Self {
            objective,
            stop,
            budget,
            history: Vec::with_capacity(budget),
            best: None,
            stopped_early: false,
            _marker: std::marker::PhantomData,
        }
    }

    pub(crate) fn done(&self) -> bool {
        self.stopped_early || self.history.len() >= self.budget
    }

    pub(crate) fn evaluate(&mut self, gains: GainVector) -> Result<f64> {
        debug_assert!(!self.done());
        let obs = (self.objective)(&gains)?;
        if !obs.fitness.is_finite() {
            return Err(Error::NonFiniteFitness { gains, fitness: obs.fitness });
        }
        self.history.push(EvalRecord { gains, fitness: obs.fitness, accepted: obs.accepted });
        if self.best.is_none_or(|(_, f)| obs.fitness < f) {
            self.best = Some((gains, obs.fitness));
        }
        if (self.stop)(&obs) {
            self.stopped_early = true;
        }
        Ok(obs.fitness)
    }

    pub(crate) fn history(&self) -> &[EvalRecord] {
        &self.history
    }

    pub(crate) fn finish(self) -> OptRun {
        let (best_gains, best_fitness) = self.best.expect("at least one evaluation");
        OptRun { best_gains, best_fitness, stopped_early: self.stopped_early, history: self.history }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_round_trip() {
        let b = Bounds::default();
        let g = GainVector::new(13.0, 0.25, 0.75);
        assert_eq!(b.normalize(&g), [0.5, 0.25, 0.75]);
        assert_eq!(b.denormalize(&b.normalize(&g)), g);
    }

    #[test]
    fn clip_and_contains() {
        let b = Bounds::default();
        let g = b.clip(GainVector::new(30.0, -1.0, 0.5));
        assert_eq!(g, GainVector::new(25.0, 0.0, 0.5));
        assert!(b.contains(&g));
        assert!(b.check(&GainVector::new(30.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn rejects_inverted_bounds() {
        let b = Bounds { kp: [5.0, 1.0], ..Bounds::default() };
        assert!(b.validate().is_err());
    }
}
