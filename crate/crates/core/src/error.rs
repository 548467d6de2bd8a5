use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("matrix entry p2[{row}][{col}] = {value} is negative")]
    NegativeRadiusCoefficient { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("insufficient history at k = {k}: need k >= {required}")]
    InsufficientHistory { k: usize, required: usize },

    #[error("insufficient samples: {available} usable rows, need at least {required}")]
    InsufficientSamples { available: usize, required: usize },

    #[error("design matrix is rank deficient (rank {rank} of {cols}, smallest singular value {sigma_min:e})")]
    RankDeficient {
        rank: usize,
        cols: usize,
        sigma_min: f64,
    },

    #[error("radius coefficient {index} = {value} is negative")]
    NegativeRadiusParam { index: usize, value: f64 },

    #[error("nonnegative least squares did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("clustering failed: {0}")]
    Clustering(String),

    #[error("class id {id} out of range 1..={cpms}")]
    ClassOutOfRange { id: usize, cpms: usize },

    #[error("empty scored range")]
    EmptyRange,

    #[error("column is constant; cannot normalize")]
    ConstantColumn,

    #[error("principal direction undefined: leading eigenvalues {first} and {second} tie")]
    EigenTie { first: f64, second: f64 },

    #[error("simulation diverged at step {step} (value {value:e})")]
    Diverged { step: usize, value: f64 },

    #[error("{path}: row {row}, column \"{column}\": {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Configuration and IO failures map to exit code 2, numerical failures to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::Csv { .. }
            | Error::Json { .. } => 2,
            _ => 1,
        }
    }
}
