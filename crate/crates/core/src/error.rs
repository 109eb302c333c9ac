use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("infinite divergence: p1[{index}] = {p1} > 0 but p2[{index}] = 0")]
    AbsoluteContinuity { index: usize, p1: f64 },

    #[error("degenerate support: order q = {q} requires strictly positive weights")]
    DegenerateSupport { q: f64 },

    #[error("diagonal order pair (alpha = beta = {0}); use the derivative instead")]
    DiagonalOrder(f64),

    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),

    #[error("regression abscissa is degenerate")]
    DegenerateAbscissa,

    #[error("at least {needed} scales required, got {got}")]
    TooFewScales { needed: usize, got: usize },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("unknown measure '{name}' (valid: {valid})")]
    UnknownMeasure { name: String, valid: String },

    #[error("measure '{0}' requires a reference distribution")]
    MissingReference(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed or unusable input data, as opposed
    /// to a numerical failure of an otherwise valid computation.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::DegenerateAbscissa)
    }
}
