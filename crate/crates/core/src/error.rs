use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("seed community `{0}` is not present in the embedding")]
    MissingCommunity(String),

    #[error("dimension `{0}` is degenerate: seed-pair differences cancel out")]
    DegenerateDimension(String),

    #[error("need at least {needed} aligned points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("series is constant; Pearson correlation is undefined")]
    ConstantSeries,

    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("series contains a gap at {0}; trim or interpolate before warping")]
    GapInSeries(String),

    #[error("group `{0}` has no comments in any quarter, its average stance is undefined")]
    UndefinedStanceAverage(String),

    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Locked(_) => 2,
            _ => 1,
        }
    }
}
