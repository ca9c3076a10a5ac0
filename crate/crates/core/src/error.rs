use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid observed vector: {0}")]
    InvalidVector(String),

    #[error("embedding dimension Γ = {total:e} exceeds the cap of {cap}")]
    EmbeddingTooLarge { total: f64, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("non-finite {what} at round {round}")]
    NonFinite { what: &'static str, round: u64 },

    #[error("{}: row {row}, column {column}: {message}", path.display())]
    Csv {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("malformed {kind} file, line {line}: {message}")]
    Format {
        kind: &'static str,
        line: usize,
        message: String,
    },

    #[error(
        "generator gave up after {attempts} attempts with only {accepted} of {wanted} samples accepted; \
         lower lambda0, raise the keep probability, or reduce the margin"
    )]
    GeneratorExhausted {
        attempts: usize,
        accepted: usize,
        wanted: usize,
    },

    #[error("iterate norm {norm:e} exceeds the bound {bound:e} at round {round}")]
    NormBoundViolated { round: u64, norm: f64, bound: f64 },

    #[error("ground truth required: {0}")]
    MissingGroundTruth(&'static str),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    TomlWrite(#[from] toml::ser::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
