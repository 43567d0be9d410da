use thiserror::Error;

/// Errors produced by the click-counting analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("configuration sums to {found}, expected {expected} detectors")]
    ConfigurationSum { expected: u32, found: u32 },

    #[error("classical ensemble has no components")]
    EmptyEnsemble,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Truncated photon-number distribution lost more mass than allowed.
    #[error("truncation tail mass {tail:.3e} exceeds tolerance {tolerance:.3e} (n_max = {n_max})")]
    Truncation {
        tail: f64,
        tolerance: f64,
        n_max: usize,
    },

    #[error("heralding bin {bin} has zero probability")]
    HeraldImpossible { bin: usize },

    #[error("classical ensembles require a uniform splitting tree")]
    NonUniformTree,

    #[error("need at least {required} shots, found {found}")]
    TooFewShots { required: usize, found: usize },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// One or more input rows were rejected; each entry is `(line, reason)`.
    #[error("{} invalid row(s): {}", .0.len(), format_rows(.0))]
    Rows(Vec<(usize, String)>),

    #[error("{0}")]
    Io(String),
}

fn format_rows(rows: &[(usize, String)]) -> String {
    rows.iter()
        .map(|(line, msg)| format!("line {line}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
