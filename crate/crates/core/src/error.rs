use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("angle {0} is outside the sine domain [-1, 1]")]
    InvalidAngle(f64),

    #[error("distance must be positive, got {0}")]
    InvalidDistance(f64),

    #[error("inverse distance must be nonnegative, got {0}")]
    InvalidInverseDistance(f64),

    #[error("near-field distance interval is empty: r_min = {r_min} m, upper bound = {upper} m")]
    EmptyDistanceInterval { r_min: f64, upper: f64 },

    #[error("index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("residual is zero; nothing left to explain")]
    ZeroResidual,

    #[error("atom is not unit norm (norm = {0})")]
    NonUnitAtom(f64),

    #[error("inverse-distance derivative requested for an angular atom")]
    RhoOnAngularAtom,

    #[error("least-squares system is rank deficient")]
    RankDeficient,

    #[error("linear system is singular")]
    Singular,

    #[error("true channel has zero energy")]
    ZeroChannel,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("missing parameter `{0}` for the chosen complexity formula")]
    MissingParameter(&'static str),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
