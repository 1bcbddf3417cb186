//! Differential evolution, rand/1/bin, single worker.
//!
//! Member 0 of the initial population is the trial's initial gain state;
//! the rest are drawn uniformly inside the box. Every objective call is one
//! experiment and counts against the budget, so a generation costs
//! `pop_size` evaluations and the run may stop mid-generation. Selection is
//! greedy and immediate: a trial vector replaces its target as soon as it
//! scores strictly better.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::optim::{Bounds, Ledger, Observation, OptRun};
use crate::pid::GainVector;
use crate::rng::{self, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    /// Differential weight F.
    pub mutation_f: f64,
    /// Binomial crossover probability CR.
    pub crossover_cr: f64,
    pub pop_size: usize,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Relative population-convergence tolerance. Zero disables it.
    pub tol: f64,
    /// Absolute population-convergence tolerance. Zero disables it.
    pub atol: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self { mutation_f: 0.6, crossover_cr: 0.6, pop_size: 15, budget: 150, tol: 0.0, atol: 0.0 }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mutation_f > 0.0 && self.mutation_f <= 2.0) {
            return Err(Error::InvalidParameter(format!("mutation factor {} not in (0, 2]", self.mutation_f)));
        }
        if !(0.0..=1.0).contains(&self.crossover_cr) {
            return Err(Error::InvalidParameter(format!("crossover rate {} not in [0, 1]", self.crossover_cr)));
        }
        if self.pop_size < 4 {
            return Err(Error::PopulationTooSmall(self.pop_size));
        }
        if self.budget < self.pop_size {
            return Err(Error::InvalidParameter(format!(
                "budget {} smaller than population {}",
                self.budget, self.pop_size
            )));
        }
        if !(self.tol >= 0.0 && self.atol >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<GainVector>,
    pub fitnesses: Vec<f64>,
    pub eval_count: usize,
}

impl Population {
    fn converged(&self, tol: f64, atol: f64) -> bool {
        if tol == 0.0 && atol == 0.0 {
            return false;
        }
        let n = self.fitnesses.len() as f64;
        let mean = self.fitnesses.iter().sum::<f64>() / n;
        let var = self.fitnesses.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
        var.sqrt() <= atol + tol * mean.abs()
    }
}

/// Donor `x_r1 + f * (x_r2 - x_r3)` with `r1, r2, r3` distinct and different
/// from `target_idx`, clipped to the box.
pub fn mutate_rand1<R: Rng + ?Sized>(
    members: &[GainVector],
    target_idx: usize,
    f: f64,
    bounds: &Bounds,
    rng: &mut R,
) -> Result<GainVector> {
    if members.len() < 4 {
        return Err(Error::PopulationTooSmall(members.len()));
    }
    let picks = index::sample(rng, members.len() - 1, 3);
    let mut r = picks.iter().map(|i| if i >= target_idx { i + 1 } else { i });
    let (r1, r2, r3) = (r.next().unwrap(), r.next().unwrap(), r.next().unwrap());
    let (base, a, b) = (members[r1].to_array(), members[r2].to_array(), members[r3].to_array());
    let donor = GainVector::from_array(std::array::from_fn(|j| base[j] + f * (a[j] - b[j])));
    Ok(bounds.clip(donor))
}

/// Binomial crossover. Each gene comes from the donor with probability
/// `cr`; one randomly chosen gene always does.
pub fn crossover_bin<R: Rng + ?Sized>(target: &GainVector, donor: &GainVector, cr: f64, rng: &mut R) -> GainVector {
    let (t, d) = (target.to_array(), donor.to_array());
    let forced = rng.random_range(0..3);
    GainVector::from_array(std::array::from_fn(|j| {
        let take = rng.random::<f64>() < cr;
        if j == forced || take {
            d[j]
        } else {
            t[j]
        }
    }))
}

/// Run DE until `stop` fires on an observation or the budget is spent.
pub fn de_run<O, S>(
    objective: O,
    bounds: &Bounds,
    config: &DeConfig,
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
    let mut rng = rng::stream(seed, Stream::DifferentialEvolution);
    let mut ledger = Ledger::new(objective, stop, config.budget);

    let mut members = Vec::with_capacity(config.pop_size);
    members.push(initial_state);
    members.extend((1..config.pop_size).map(|_| bounds.sample_uniform(&mut rng)));

    let mut fitnesses = Vec::with_capacity(config.pop_size);
    for m in &members {
        if ledger.done() {
            break;
        }
        fitnesses.push(ledger.evaluate(*m)?);
    }

    if !ledger.done() {
        let mut pop = Population { members, fitnesses, eval_count: ledger.history().len() };
        'generations: loop {
            for i in 0..config.pop_size {
                if ledger.done() {
                    break 'generations;
                }
                let donor = mutate_rand1(&pop.members, i, config.mutation_f, bounds, &mut rng)?;
                let trial = crossover_bin(&pop.members[i], &donor, config.crossover_cr, &mut rng);
                let fitness = ledger.evaluate(trial)?;
                pop.eval_count += 1;
                if fitness < pop.fitnesses[i] {
                    pop.members[i] = trial;
                    pop.fitnesses[i] = fitness;
                }
            }
            if pop.converged(config.tol, config.atol) {
                break;
            }
        }
    }
    Ok(ledger.finish())
}
