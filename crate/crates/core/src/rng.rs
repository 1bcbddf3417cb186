//! Seeded random streams.
//!
//! One master seed per trial feeds several consumers. Each consumer draws
//! from its own ChaCha stream, so enabling plant noise does not shift the
//! optimizer's draws and vice versa.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed stream labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    PlantNoise = 1,
    DifferentialEvolution = 2,
    BayesianOptimization = 3,
}

pub type Rng = ChaCha8Rng;

/// Rng for `stream` derived from `seed`.
pub fn stream(seed: u64, stream: Stream) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
