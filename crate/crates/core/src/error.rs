use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// `beta * x` could not be separated from an integer at the maximum precision.
    #[error("floor of beta*x not certifiable at step {index} (precision {bits} bits)")]
    UncertifiedFloor { index: usize, bits: u32 },

    /// A certified comparison ran out of precision.
    #[error("precision exhausted at index {index} (precision {bits} bits)")]
    PrecisionExhausted { index: usize, bits: u32 },

    /// The expansion of 1 could not be certified far enough.
    #[error("expansion of 1 undecided beyond depth {certified} (needed {needed})")]
    UndecidedFiniteness { certified: usize, needed: usize },

    #[error("word {0} is not admissible")]
    InadmissibleWord(String),

    #[error("projected size {projected} exceeds budget {cap}")]
    BudgetExceeded { projected: String, cap: u64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("precondition cannot be verified: {0}")]
    PreconditionUnverifiable(String),

    #[error("need at least 3 levels for a regression, got {0}")]
    DegenerateRange(usize),

    #[error("invalid base: {0}")]
    InvalidBeta(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by insufficient working precision.
    pub fn is_certification(&self) -> bool {
        matches!(
            self,
            Error::UncertifiedFloor { .. } | Error::PrecisionExhausted { .. }
        )
    }

    pub(crate) fn budget(projected: impl ToString, cap: u64) -> Self {
        Error::BudgetExceeded {
            projected: projected.to_string(),
            cap,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
