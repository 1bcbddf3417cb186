use std::path::PathBuf;

use crate::pid::GainVector;

/// Errors produced by the workbench.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("simulation diverged at t = {time_ms} ms (theta = {theta}, omega = {omega})")]
    Divergence { time_ms: u64, theta: f64, omega: f64 },

    #[error("objective returned non-finite fitness {fitness} for gains {gains}")]
    NonFiniteFitness { gains: GainVector, fitness: f64 },

    #[error("gains {gains} lie outside the search box")]
    OutOfBounds { gains: GainVector },

    #[error("population of {0} members is too small for rand/1 mutation (need at least 4)")]
    PopulationTooSmall(usize),

    #[error("kernel matrix is not positive definite; increase jitter (currently {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("all samples are identical; pass an explicit bandwidth")]
    DegenerateSamples,

    #[error("no plant parameters registered for robot `{0}`")]
    UnknownRobot(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by reading or writing files.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
