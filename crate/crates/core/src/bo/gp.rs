use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::BoConfig;
use crate::optim::Bounds;
use crate::pid::GainVector;
use crate::{Error, Result};

const REFINEMENT_STEPS: usize = 8;

/// Exact GP posterior with a fixed isotropic squared-exponential kernel.
#[derive(Debug, Clone)]
pub struct GpModel {
    bounds: Bounds,
    inputs: Vec<[f64; 3]>,
    targets: Vec<f64>,
    target_mean: f64,
    target_scale: f64,
    length_scale: f64,
    signal_variance: f64,
    cholesky: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|j| (a[j] - b[j]).powi(2)).sum()
}

impl GpModel {
    fn kernel(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        self.signal_variance * (-sq_dist(a, b) / (2.0 * self.length_scale * self.length_scale)).exp()
    }

    /// Training inputs in unit-cube coordinates, after duplicate collapse.
    pub fn inputs(&self) -> &[[f64; 3]] {
        &self.inputs
    }

    /// Training targets in fitness units, after duplicate collapse.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn standardize(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_scale
    }

    pub fn target_scale(&self) -> f64 {
        self.target_scale
    }

    /// Lowest observed target, standardized.
    pub fn best_standardized(&self) -> f64 {
        self.targets.iter().map(|&y| self.standardize(y)).fold(f64::INFINITY, f64::min)
    }

    /// Posterior (mean, std) in standardized units for unit-cube points.
    pub fn predict_standardized(&self, points: &[[f64; 3]]) -> Vec<(f64, f64)> {
        let n = self.inputs.len();
        let cross = DMatrix::from_fn(n, points.len(), |i, j| self.kernel(&self.inputs[i], &points[j]));
        let means = cross.tr_mul(&self.alpha);
        let v = self.cholesky.l_dirty().solve_lower_triangular(&cross).expect("cholesky factor has a nonzero diagonal");
        (0..points.len())
            .map(|j| {
                let explained = v.column(j).norm_squared();
                (means[j], (self.signal_variance - explained).max(0.0).sqrt())
            })
            .collect()
    }
}

/// Fit the surrogate. Inputs with identical coordinates are collapsed to
/// one point whose target is their mean.
pub fn gp_fit(inputs: &[GainVector], targets: &[f64], bounds: &Bounds, config: &BoConfig) -> Result<GpModel> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::InvalidParameter(format!(
            "GP needs matching nonempty inputs/targets, got {} and {}",
            inputs.len(),
            targets.len()
        )));
    }
    let mut unique: Vec<([f64; 3], f64, usize)> = Vec::with_capacity(inputs.len());
    for (g, &y) in inputs.iter().zip(targets) {
        bounds.check(g)?;
        let u = bounds.normalize(g);
        match unique.iter_mut().find(|(v, _, _)| *v == u) {
            Some((_, sum, count)) => {
                *sum += y;
                *count += 1;
            }
            None => unique.push((u, y, 1)),
        }
    }
    let inputs: Vec<[f64; 3]> = unique.iter().map(|(u, _, _)| *u).collect();
    let targets: Vec<f64> = unique.iter().map(|(_, sum, count)| sum / *count as f64).collect();

    let n = targets.len() as f64;
    let target_mean = targets.iter().sum::<f64>() / n;
    let spread = (targets.iter().map(|y| (y - target_mean).powi(2)).sum::<f64>() / n).sqrt();
    let target_scale = if spread > 1e-12 { spread } else { 1.0 };

    let mut model = GpModel {
        bounds: *bounds,
        inputs,
        targets,
        target_mean,
        target_scale,
        length_scale: config.kernel_length_scale,
        signal_variance: config.signal_variance,
        cholesky: Cholesky::new(DMatrix::identity(1, 1)).unwrap(),
        alpha: DVector::zeros(0),
    };
    let m = model.inputs.len();
    let exact = DMatrix::from_fn(m, m, |i, j| model.kernel(&model.inputs[i], &model.inputs[j]));
    let gram = &exact + DMatrix::from_diagonal_element(m, m, config.jitter);
    let cholesky = Cholesky::new(gram).ok_or(Error::NotPositiveDefinite { jitter: config.jitter })?;
    let y = DVector::from_iterator(m, model.targets.iter().map(|&t| (t - target_mean) / target_scale));
    model.alpha = refine_weights(&cholesky, &exact, &y);
    model.cholesky = cholesky;
    Ok(model)
}

/// Solve with the jittered factor, then refine against the unjittered Gram
/// matrix so the posterior mean interpolates the targets. A step is kept
/// only while it shrinks the residual.
fn refine_weights(cholesky: &Cholesky<f64, Dyn>, exact: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut alpha = cholesky.solve(y);
    let mut residual = y - exact * &alpha;
    for _ in 0..REFINEMENT_STEPS {
        let candidate = &alpha + cholesky.solve(&residual);
        let next = y - exact * &candidate;
        if next.norm() >= residual.norm() {
            break;
        }
        alpha = candidate;
        residual = next;
    }
    alpha
}

/// Posterior mean and std at `x`, in fitness units.
pub fn gp_predict(model: &GpModel, x: &GainVector) -> (f64, f64) {
    let (m, s) = model.predict_standardized(&[model.bounds.normalize(x)])[0];
    (m * model.target_scale + model.target_mean, s * model.target_scale)
}
