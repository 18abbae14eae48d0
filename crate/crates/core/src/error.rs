use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("{name} out of range: {detail}")]
    Range { name: &'static str, detail: String },

    /// A shard size or workload split is not an integer.
    #[error("{divisor} does not divide {dividend} ({context})")]
    Divisibility {
        divisor: usize,
        dividend: usize,
        context: &'static str,
    },

    /// An operation was called outside the regime it is defined for.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two independent evaluation routes disagreed.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn range(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            name,
            detail: detail.into(),
        }
    }
}
