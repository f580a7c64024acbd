//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, smoothing, estimation, and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A covariance block failed its symmetry/PSD check.
    #[error("matrix `{name}` is not symmetric PSD (min eigenvalue {min_eig:.3e})")]
    NotPsd { name: String, min_eig: f64 },

    /// Innovation covariance too ill-conditioned to invert.
    #[error("singular innovation covariance at time {time}, observation {obs_index} (condition number {cond:.3e})")]
    SingularInnovation {
        time: usize,
        obs_index: usize,
        cond: f64,
    },

    /// Predicted covariance in the backward pass cannot be inverted.
    #[error("singular predicted covariance at time {time}")]
    SingularPrediction { time: usize },

    /// A linear solve or inversion failed outside the smoother.
    #[error("singular matrix in {context}")]
    Singular { context: String },

    /// Invalid argument with an explanation naming the offending field.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// All particle weights underflowed at a time step.
    #[error("degenerate particle weights at time {time}: all log-weights are -inf")]
    DegenerateWeights { time: usize },

    /// FFBSm backward denominator vanished.
    #[error("zero backward-smoothing denominator at time {time}, particle {particle}")]
    ZeroBackwardDenominator { time: usize, particle: usize },

    /// Estimation failure wrapping an inner error with iteration context.
    #[error("estimation failed at iteration {iteration}: {source}")]
    Estimation {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// Every candidate in a set failed scoring.
    #[error("all {count} candidates failed scoring; first failure: {first}")]
    AllCandidatesFailed { count: usize, first: String },

    /// Configuration file problems, with a field path where applicable.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// I/O and serialization wrappers.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Parse failure in a data file, with row context.
    #[error("parse error in {file} at record {record}: {message}")]
    Parse {
        file: String,
        record: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
