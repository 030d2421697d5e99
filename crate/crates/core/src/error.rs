use thiserror::Error;

/// Errors raised anywhere in the engine.
///
/// Several variants are verification alarms rather than input errors: they
/// signal that two independent computations disagreed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {0} is not rational")]
    NotRational(String),
    #[error("value {0} is not an integer")]
    NonIntegral(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("unsupported parameters: {0}")]
    UnsupportedParams(String),
    #[error("unsupported twist: {0}")]
    UnsupportedTwist(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("validation failure: {0}")]
    ValidationFailure(String),
    #[error("singular series: {0}")]
    SingularSeries(String),
    #[error("grouping mismatch: by elements {by_elements}, by cyclic subgroups {by_cyclic}")]
    GroupingMismatch { by_elements: String, by_cyclic: String },
    #[error("twist mismatch: pairing formula {pairing}, direct {direct}")]
    TwistMismatch { pairing: String, direct: String },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("reconstruction failure: {0}")]
    ReconstructionFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that mean "two routes disagreed" as opposed to bad input.
    pub fn is_verification_failure(&self) -> bool {
        matches!(
            self,
            Error::NotRational(_)
                | Error::NonIntegral(_)
                | Error::GroupingMismatch { .. }
                | Error::TwistMismatch { .. }
                | Error::ReconstructionFailure(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
