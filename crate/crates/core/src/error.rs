use std::path::PathBuf;

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular operator: {0}")]
    Singular(String),

    /// A log-domain value fell outside the decodable window under an
    /// erroring policy. `phase` is 0 or pi for real values.
    #[error("value outside decodable range (log magnitude {log_mag}, phase {phase}{})",
        coordinate.map(|c| format!(", coordinate {c}")).unwrap_or_default())]
    Range {
        log_mag: f64,
        phase: f64,
        coordinate: Option<usize>,
    },

    /// A precondition on magnitudes failed (dense oracle limits).
    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("recipe validation failed: {0}")]
    Validation(String),

    /// A search budget ran out before the tolerance was met.
    #[error("budget exhausted: {0}")]
    Exhausted(String),

    /// A stored witness failed re-verification.
    #[error("witness check failed: {0}")]
    WitnessCheck(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn witness(msg: impl Into<String>) -> Self {
        Error::WitnessCheck(msg.into())
    }

    /// Attach a coordinate index to a range error.
    pub(crate) fn at_coordinate(self, index: usize) -> Self {
        match self {
            Error::Range { log_mag, phase, .. } => Error::Range {
                log_mag,
                phase,
                coordinate: Some(index),
            },
            other => other,
        }
    }
}
