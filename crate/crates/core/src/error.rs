use std::path::PathBuf;

/// Errors raised by the analysis pipeline. Messages are prefixed with the
/// stage that produced them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ingest: cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("ingest: malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("ingest: row {row}, column '{column}': cannot parse {value:?} as a finite number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("ingest: row {row}, column '{column}': missing value")]
    MissingValue { row: usize, column: String },

    #[error("ingest: column selector {0:?} does not match any column")]
    UnknownColumn(String),

    #[error("ingest: need at least {min} rows, got {got}")]
    TooFewRows { min: usize, got: usize },

    #[error("ingest: need at least 2 analysis columns, got {0}")]
    TooFewColumns(usize),

    #[error("ingest: column '{0}' is constant (zero variance)")]
    ConstantColumn(String),

    #[error("corrstats: {0}")]
    Correlation(String),

    #[error("corrstats: invalid correlation fixture: {0}")]
    Fixture(String),

    #[error("corrstats: invalid fixture JSON: {0}")]
    FixtureJson(#[from] serde_json::Error),

    #[error("eigensolve: Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("eigensolve: matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("eigensolve: eigenvector matrix is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("{context}: dimension mismatch: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("pcacore: number of components {k} outside 1..={n}")]
    InvalidComponentCount { k: usize, n: usize },

    #[error("{context}: threshold {value} outside {range}")]
    InvalidThreshold {
        context: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("varcluster: cluster count {k} outside 1..={n}")]
    InvalidClusterCount { k: usize, n: usize },

    #[error("clireport: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;
