use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("Gram matrix is numerically singular")]
    SingularGram,
    #[error("leave-one-out Gram matrix for example {index} is numerically singular")]
    SingularLeaveOneOut { index: usize },
    #[error("diagonal entry K[{index},{index}] is zero")]
    SingularCoordinate { index: usize },
    #[error("training data are not linearly separable")]
    NotSeparable,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("matrix of order {n} exceeds the dense limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("no admissible k: (n-1)/c = {ratio} must exceed 1")]
    NoAdmissibleK { ratio: f64 },
    #[error("equivalence verdicts disagree: {0}")]
    Inconsistent(String),
}
