use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("distribution table has {entries} entries, above the desk-scale limit of {limit}")]
    TooLarge { entries: u64, limit: u64 },

    #[error("conditioning event has zero probability")]
    ZeroProbabilityEvent,

    #[error("index {index} out of range (bound {bound})")]
    OutOfRange { index: usize, bound: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "exhaustive check over C({ell},{k}) = {subsets} subsets exceeds the limit of {limit}; \
         use sampled mode (--trials N) instead"
    )]
    CombinatorialBlowup {
        ell: usize,
        k: usize,
        subsets: u128,
        limit: u128,
    },

    #[error("duplicate twist argument {0}")]
    DuplicateTwistArgument(String),

    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("leakage budget exceeded: requested {requested} bits with {remaining} remaining")]
    BudgetExceeded { requested: u64, remaining: u64 },

    #[error("oracle query budget of {0} exhausted")]
    QueryBudgetExceeded(u64),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn malformed(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Malformed {
            what,
            detail: detail.into(),
        }
    }
}
