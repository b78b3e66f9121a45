use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = DoaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DoaError {
    #[error("invalid array configuration: {0}")]
    InvalidConfig(String),

    #[error("angle {0} deg outside [0, 180]")]
    AngleOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown source kind `{0}`")]
    UnknownKind(String),

    #[error("scene has no sources")]
    EmptyScene,

    #[error("propagation delay of {delay} samples exceeds waveform length {len}")]
    DelayTooLong { delay: f64, len: usize },

    #[error("need at least {needed} samples for one analysis window, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("need {needed} frames of history ending at frame {frame}, spectrogram has {available}")]
    InsufficientHistory {
        needed: usize,
        frame: usize,
        available: usize,
    },

    #[error("oracle presence probability requested without ground truth")]
    MissingGroundTruth,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sub-bandwidth window has no retained bins")]
    EmptyWindow,

    #[error("all smoothing weights are zero")]
    DegenerateCovariance,

    #[error("focusing matrix ill-conditioned (cond = {0:e})")]
    IllConditioned(f64),

    #[error("every bin in the window is ill-conditioned")]
    AllIllConditioned,

    #[error("no sub-bands retained for estimation")]
    NoRetainedBins,

    #[error("every cell of the DOA row is missing")]
    AllMissing,

    #[error("wav {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
