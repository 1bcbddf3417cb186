//! Bayesian optimization with a Gaussian-process surrogate and expected
//! improvement.
//!
//! The surrogate is refit exactly after every evaluation on the full
//! history. Inputs live in the unit cube spanned by the search bounds and
//! targets are standardized per refit, so the exploration bonus `xi` is
//! expressed in standard deviations of the observed fitness.

mod acquisition;
mod gp;

pub use acquisition::{expected_improvement, normal_cdf, normal_pdf, propose_next};
pub use gp::{gp_fit, gp_predict, GpModel};

use serde::{Deserialize, Serialize};

use crate::optim::{Bounds, Ledger, Observation, OptRun};
use crate::pid::GainVector;
use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Std of the Gaussian perturbations applied to incumbents, in unit-cube
/// coordinates.
pub const PERTURBATION_STD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    /// Exploration bonus of expected improvement, standardized units.
    pub xi: f64,
    pub budget: usize,
    /// Squared-exponential length scale in unit-cube coordinates.
    pub kernel_length_scale: f64,
    pub signal_variance: f64,
    pub jitter: f64,
    /// Number of candidates scored per proposal.
    pub candidate_count: usize,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            xi: 0.1,
            budget: 150,
            kernel_length_scale: 0.2,
            signal_variance: 1.0,
            jitter: 1e-8,
            candidate_count: 2048,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.xi >= 0.0
            && self.jitter > 0.0
            && self.candidate_count >= 1
            && self.budget >= 1
            && self.kernel_length_scale > 0.0
            && self.signal_variance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("BO config {self:?}")))
        }
    }
}

/// Run BO from a single-point initial design until `stop` fires or the
/// budget is spent.
pub fn bo_run<O, S>(
    objective: O,
    bounds: &Bounds,
    config: &BoConfig,
    initial_state: GainVector,
    seed: u64,
    stop: S,
) -> Result<OptRun>
where
    O: FnMut(&GainVector) -> Result<Observation>,
    S: Fn(&Observation) -> bool,
{
    config.validate()?;
    bounds.validate()?;
    bounds.check(&initial_state)?;
    let mut rng = rng::stream(seed, Stream::BayesianOptimization);
    let mut ledger = Ledger::new(objective, stop, config.budget);

    ledger.evaluate(initial_state)?;
    let mut inputs = vec![initial_state];
    let mut targets = vec![ledger.history()[0].fitness];
    while !ledger.done() {
        let model = gp_fit(&inputs, &targets, bounds, config)?;
        let next = propose_next(&model, bounds, config, &mut rng);
        let fitness = ledger.evaluate(next)?;
        inputs.push(next);
        targets.push(fitness);
    }
    Ok(ledger.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(g: &GainVector) -> Result<Observation> {
        let u = Bounds::default().normalize(g);
        let c = [0.35, 0.6, 0.4];
        Ok(Observation { fitness: (0..3).map(|j| (u[j] - c[j]).powi(2)).sum(), accepted: true })
    }

    fn never(_: &Observation) -> bool {
        false
    }

    const INIT: GainVector = GainVector::new(20.0, 0.05, 0.05);

    #[test]
    fn budget_one_only_evaluates_initial_state() {
        let cfg = BoConfig { budget: 1, ..BoConfig::default() };
        let run = bo_run(sphere, &Bounds::default(), &cfg, INIT, 0, never).unwrap();
        assert_eq!(run.history.len(), 1);
        assert_eq!(run.history[0].gains, INIT);
    }

    #[test]
    fn improves_on_sphere() {
        let cfg = BoConfig { budget: 150, candidate_count: 512, ..BoConfig::default() };
        let init = sphere(&INIT).unwrap().fitness;
        let improved = (0..10)
            .filter(|&seed| bo_run(sphere, &Bounds::default(), &cfg, INIT, seed, never).unwrap().best_fitness < init)
            .count();
        assert!(improved >= 9, "{improved}/10");
    }

    #[test]
    fn deterministic_and_inside_bounds() {
        let cfg = BoConfig { budget: 30, candidate_count: 256, ..BoConfig::default() };
        let a = bo_run(sphere, &Bounds::default(), &cfg, INIT, 5, never).unwrap();
        let b = bo_run(sphere, &Bounds::default(), &cfg, INIT, 5, never).unwrap();
        assert_eq!(a, b);
        assert!(a.history.iter().all(|r| Bounds::default().contains(&r.gains)));
        assert!(a.best_so_far().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn stops_on_predicate() {
        let cfg = BoConfig { budget: 150, candidate_count: 256, ..BoConfig::default() };
        let run = bo_run(sphere, &Bounds::default(), &cfg, INIT, 1, |o: &Observation| o.fitness < 0.05).unwrap();
        assert!(run.stopped_early);
        assert!(run.history.len() < 150);
    }

    #[test]
    fn non_finite_fitness_is_reported() {
        let bad = |_: &GainVector| Ok(Observation { fitness: f64::INFINITY, accepted: false });
        assert!(matches!(
            bo_run(bad, &Bounds::default(), &BoConfig::default(), INIT, 0, never),
            Err(Error::NonFiniteFitness { .. })
        ));
    }
}
