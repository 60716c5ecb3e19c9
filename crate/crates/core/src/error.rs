use thiserror::Error;

/// Errors raised by the library. Variants mirror the failure classes of the
/// pipeline: bad input, combinatorial blow-up, numerical non-convergence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("numeric failure in {what} (residual {residual:e})")]
    NumericFailure { what: String, residual: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(what: impl Into<String>, residual: f64) -> Self {
        Error::NumericFailure { what: what.into(), residual }
    }

    /// Wraps the error with the pipeline stage in which it occurred.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
