use thiserror::Error;

use crate::lp::LpError;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: bad shapes, unnormalized pmfs, unknown names.
    Schema,
    /// Well-formed input that violates an operation's precondition.
    Precondition,
    /// A numerical routine could not produce a result.
    Numerical,
    /// Reading inputs or writing outputs failed.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` listed more than once")]
    DuplicateVariable(String),

    #[error("variable subsets overlap on `{0}`")]
    OverlappingSubsets(String),

    #[error("alphabet mismatch for `{name}`: {detail}")]
    AlphabetMismatch { name: String, detail: String },

    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("entry {index} is {value}, outside [0, 1]")]
    InvalidEntry { index: usize, value: f64 },

    #[error("pmf sums to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("kernel row {row} is undefined but carries probability {mass}")]
    UndefinedRow { row: usize, mass: f64 },

    #[error("coding distribution is not in Markov form: {0}")]
    NotMarkov(String),

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("alpha = {alpha} outside [0, {alpha_max}]: entry {entry} leaves [0, 1]")]
    AlphaOutOfRange { alpha: f64, alpha_max: f64, entry: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("empty alpha schedule")]
    EmptySchedule,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear program: {0}")]
    Lp(#[from] LpError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidAlphabet(_)
            | Error::UnknownVariable(_)
            | Error::DuplicateVariable(_)
            | Error::OverlappingSubsets(_)
            | Error::AlphabetMismatch { .. }
            | Error::LengthMismatch { .. }
            | Error::InvalidEntry { .. }
            | Error::NotNormalized { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidCurve(_)
            | Error::InvalidPerturbation(_)
            | Error::EmptySchedule
            | Error::Json(_)
            | Error::Csv(_) => ErrorKind::Schema,
            Error::UndefinedRow { .. }
            | Error::NotMarkov(_)
            | Error::AlphaOutOfRange { .. }
            | Error::Precondition(_) => ErrorKind::Precondition,
            Error::Lp(_) => ErrorKind::Numerical,
            Error::Io { .. } => ErrorKind::Io,
        }
    }
}
