use thiserror::Error;

/// Crate-wide error type. Budget and cap overruns are deliberately distinct
/// from negative verdicts: a `false` answer always carries a witness, an
/// `Error` means the question was not answered.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("exhaustive scan over {needed} candidates exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("vertex count {n} exceeds exhaustive-mode cap {cap}")]
    SizeCapExceeded { n: usize, cap: usize },
    #[error("retry budget ({retries}) exhausted: {what}")]
    RetriesExhausted { retries: usize, what: String },
    #[error("no extension found for vertex {attach_at} (hypotheses not satisfied)")]
    NoExtension { attach_at: u32 },
    #[error("no cross edge between the two leaf image sets")]
    NoCrossEdge,
    #[error("trace step {step}: {reason}")]
    BadTrace { step: usize, reason: String },
    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("search found nothing and exhausted the space: {0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn at_step(self, step: usize) -> Self {
        Error::StepFailed {
            step,
            source: Box::new(self),
        }
    }
}
