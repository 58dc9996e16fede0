//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by fitting, optimization, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a domain precondition (non-positive latency, mIoU
    /// outside [0, 100], point outside the box, ...).
    #[error("{0}")]
    Domain(String),

    /// An operation that needs data received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Too few distinct configurations to determine the model.
    #[error("underdetermined {what}: need at least {needed} distinct configs, got {got}")]
    Underdetermined {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// The design matrix (or linearized system) does not have full column
    /// rank; `detail` names the dependent basis directions.
    #[error("rank-deficient system: {detail}")]
    RankDeficient { detail: String },

    /// Rational-surrogate denominator vanished or changed sign.
    #[error("denominator pole near (b={b}, h={h}): |denominator| = {magnitude:e}")]
    Pole { b: f64, h: f64, magnitude: f64 },

    /// Normalization bounds collapsed (min == max) for a metric that
    /// carries nonzero weight.
    #[error("degenerate normalization bounds for {metric}: min == max but weight is nonzero")]
    DegenerateBounds { metric: &'static str },

    /// Every descent start failed.
    #[error("optimization failed: {detail}")]
    Optimization { detail: String },

    /// A leave-one-out refit failed; carries the held-out sample index.
    #[error("leave-one-out refit failed holding out sample {index}: {source}")]
    Loo {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Malformed input file.
    #[error("{0}")]
    Format(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-parseable category, used as `error[<category>]` by
    /// the command-line front end.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::EmptyInput(_) => "empty-input",
            Error::Underdetermined { .. } => "underdetermined",
            Error::RankDeficient { .. } => "rank-deficient",
            Error::Pole { .. } => "pole",
            Error::DegenerateBounds { .. } => "degenerate-bounds",
            Error::Optimization { .. } => "optimization",
            Error::Loo { source, .. } => source.category(),
            Error::Format(_) => "format",
            Error::Json(_) => "format",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
