use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{m} exceeds the cap {cap}")]
    OrderTooLarge { p: u64, m: u32, cap: u64 },
    #[error("no irreducible polynomial of degree {m} found over Z/{p}")]
    NoIrreducible { p: u64, m: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields (orders {left} and {right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("enumeration of {required} points exceeds the cap {cap}")]
    EnumerationTooLarge { required: u128, cap: u64 },
    #[error("exhaustive search needs a budget of {required}, got {budget}")]
    BudgetTooSmall { required: u128, budget: u64 },
    #[error("coefficient {value} out of range for characteristic {p}")]
    CoefficientOutOfRange { value: u32, p: u32 },
    #[error("the zero vector does not define a line")]
    ZeroLine,
    #[error("the function is identically zero")]
    ZeroFunction,
    #[error("invalid exponent {0}: must be a rational number >= 1")]
    InvalidExponent(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
