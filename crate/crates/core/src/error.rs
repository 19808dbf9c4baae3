use thiserror::Error;

/// Errors raised while designing, composing or analysing filters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid filter specification: {0}")]
    InvalidSpec(String),

    #[error("transition width {width:.3e} rad is below the design floor {floor:.3e} rad")]
    TransitionTooNarrow { width: f64, floor: f64 },

    #[error("exchange iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("no filter length up to {0} meets the specification")]
    LengthCapExceeded(usize),

    #[error("unsupported filter: {0}")]
    UnsupportedFilter(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("could not bracket the 3-dB point between edge offsets {low:.4e} and {high:.4e}")]
    ThreeDbBracket { low: f64, high: f64 },

    #[error("branch alignment failed: {0}")]
    Alignment(String),

    #[error("invalid interpolation factor {factor}: {reason}")]
    InvalidFactor { factor: usize, reason: String },

    #[error("IFIR cascade with factor {factor} misses the specification after the ripple split")]
    BudgetFailure { factor: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_)
                | Error::LengthCapExceeded(_)
                | Error::ThreeDbBracket { .. }
                | Error::BudgetFailure { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
