use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erfc;

use super::{BoConfig, GpModel, PERTURBATION_STD};
use crate::optim::Bounds;
use crate::pid::GainVector;

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected improvement below `best_fitness` (minimization).
///
/// With `a = best - mean - xi`: `max(a, 0)` when `std == 0`, otherwise
/// `a * Phi(a / std) + std * phi(a / std)`.
pub fn expected_improvement(mean: f64, std: f64, best_fitness: f64, xi: f64) -> f64 {
    let a = best_fitness - mean - xi;
    if std <= 0.0 {
        return a.max(0.0);
    }
    let z = a / std;
    (a * normal_cdf(z) + std * normal_pdf(z)).max(0.0)
}

/// Maximize EI over a random candidate pool.
///
/// The pool holds `candidate_count` points: uniform draws in the unit cube
/// first, then Gaussian perturbations of the best training points (at most
/// one per point, at most a quarter of the pool). The first maximizer in
/// that order wins.
pub fn propose_next<R: Rng + ?Sized>(model: &GpModel, bounds: &Bounds, config: &BoConfig, rng: &mut R) -> GainVector {
    let n_perturbed = model.inputs().len().min(config.candidate_count / 4);
    let n_uniform = config.candidate_count - n_perturbed;

    let mut pool: Vec<[f64; 3]> = Vec::with_capacity(config.candidate_count);
    pool.extend((0..n_uniform).map(|_| std::array::from_fn(|_| rng.random::<f64>())));

    let mut ranked: Vec<usize> = (0..model.inputs().len()).collect();
    ranked.sort_by(|&a, &b| model.targets()[a].total_cmp(&model.targets()[b]));
    let jitter = Normal::new(0.0, PERTURBATION_STD).expect("positive std");
    for &i in ranked.iter().take(n_perturbed) {
        let base = model.inputs()[i];
        pool.push(std::array::from_fn(|j| (base[j] + jitter.sample(rng)).clamp(0.0, 1.0)));
    }

    let best = model.best_standardized();
    let mut winner = 0;
    let mut winner_ei = f64::NEG_INFINITY;
    for (k, (m, s)) in model.predict_standardized(&pool).into_iter().enumerate() {
        let ei = expected_improvement(m, s, best, config.xi);
        if ei > winner_ei {
            winner = k;
            winner_ei = ei;
        }
    }
    bounds.denormalize(&pool[winner])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bo::gp_fit;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_std() {
        assert_eq!(expected_improvement(10.0 - 5.0, 0.0, 10.0, 1.0), 4.0);
        assert_eq!(expected_improvement(12.0, 0.0, 10.0, 1.0), 0.0);
    }

    #[test]
    fn at_incumbent_equals_pdf_at_zero() {
        let ei = expected_improvement(3.0, 1.0, 3.0, 0.0);
        assert!((ei - 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-10);
        assert!((normal_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn nonnegative_and_decreasing_in_xi(
            mean in -10.0..10.0f64, std in 0.0..5.0f64, best in -10.0..10.0f64,
            xi1 in 0.0..2.0f64, dxi in 0.0..2.0f64,
        ) {
            let lo = expected_improvement(mean, std, best, xi1);
            let hi = expected_improvement(mean, std, best, xi1 + dxi);
            prop_assert!(lo >= 0.0 && hi >= 0.0);
            prop_assert!(hi <= lo);
        }
    }

    fn single_point_model() -> GpModel {
        let g = GainVector::new(13.0, 0.5, 0.5);
        gp_fit(&[g], &[3000.0], &Bounds::default(), &BoConfig::default()).unwrap()
    }

    #[test]
    fn large_xi_explores_away_from_data() {
        let cfg = BoConfig { xi: 5.0, ..BoConfig::default() };
        let model = single_point_model();
        let far = (0..10)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let p = Bounds::default().normalize(&propose_next(&model, &Bounds::default(), &cfg, &mut rng));
                let d: f64 = (0..3).map(|j| (p[j] - 0.5).powi(2)).sum::<f64>().sqrt();
                d >= cfg.kernel_length_scale
            })
            .count();
        assert!(far >= 9, "{far}/10");
    }

    #[test]
    fn single_candidate_is_returned() {
        let cfg = BoConfig { candidate_count: 1, ..BoConfig::default() };
        let model = single_point_model();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let proposal = propose_next(&model, &Bounds::default(), &cfg, &mut rng);
        let mut replay = ChaCha8Rng::seed_from_u64(8);
        let only: [f64; 3] = std::array::from_fn(|_| replay.random::<f64>());
        assert_eq!(proposal, Bounds::default().denormalize(&only));
    }

    #[test]
    fn proposals_are_deterministic_and_bounded() {
        let model = single_point_model();
        let cfg = BoConfig::default();
        let a = propose_next(&model, &Bounds::default(), &cfg, &mut ChaCha8Rng::seed_from_u64(2));
        let b = propose_next(&model, &Bounds::default(), &cfg, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(a, b);
        assert!(Bounds::default().contains(&a));
    }
}
