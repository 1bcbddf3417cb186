use serde::{Deserialize, Serialize};

use crate::bo::normal_pdf;
use crate::{Error, Result};

pub const GRID_POINTS: usize = 512;
/// Grid margin beyond the data range, in bandwidths.
const GRID_MARGIN: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule of thumb.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// Arithmetic mean of the samples.
    pub mean: f64,
}

impl KdeCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid.windows(2).zip(self.density.windows(2)).map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0).sum()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`. Falls back to the standard
/// deviation alone when the interquartile range is zero.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateSamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

/// Gaussian kernel density estimate on a 512-point grid spanning the data
/// range plus four bandwidths on each side.
pub fn kde(samples: &[f64], bandwidth: Bandwidth) -> Result<KdeCurve> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let h = match bandwidth {
        Bandwidth::Auto => silverman_bandwidth(samples)?,
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(h) => return Err(Error::InvalidParameter(format!("bandwidth {h} must be positive"))),
    };
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - GRID_MARGIN * h;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + GRID_MARGIN * h;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();
    let norm = samples.len() as f64 * h;
    let density = grid.iter().map(|&x| samples.iter().map(|&s| normal_pdf((x - s) / h)).sum::<f64>() / norm).collect();
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(KdeCurve { grid, density, bandwidth: h, mean })
}
