use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps these onto exit codes: configuration and range errors are
/// usage failures (exit 1); budget, undefined-value, and self-check errors
/// are numeric failures (exit 2).
#[derive(Debug, Error)]
pub enum Error {
    /// A power-law exponent at or below 1 makes the length series diverge:
    /// no probability law exists.
    #[error("excursion-length series diverges: gamma = {0} must exceed 1")]
    DivergingSeries(f64),

    /// Bad parameter or parameter combination, rejected before computing.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The requested computation exceeds a configured work or memory budget.
    #[error("numeric budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A query past the horizon a table was built for.
    #[error("index {index} beyond table horizon {horizon}")]
    OutOfHorizon { index: u64, horizon: u64 },

    /// A ratio whose denominator mass is exactly zero.
    #[error("undefined ratio: pmf({0}) = 0")]
    UndefinedRatio(u64),

    /// Window bounds left the admissible range.
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    /// A fit or scan was requested on a range where it is not defined.
    #[error("fit range restriction: {0}")]
    RangeRestriction(String),

    /// An internal exactness self-check failed; no output was written.
    #[error("self-check failed: {0}")]
    SelfCheck(String),

    /// Unparseable input file.
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
