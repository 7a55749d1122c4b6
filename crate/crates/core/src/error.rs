use thiserror::Error;

/// Errors produced by the carries library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid base {0}: expected an odd integer >= 3")]
    InvalidBase(u64),

    #[error("digit {digit} out of range for base {base} (|d| <= {max})")]
    InvalidDigit { digit: i64, base: u64, max: i64 },

    #[error("base mismatch: expected {expected}, found {found}")]
    BaseMismatch { expected: u64, found: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration of {required} cases exceeds budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

/// Checks that `b` is an odd base of at least 3.
pub fn check_odd_base(b: u64) -> Result<()> {
    if b < 3 || b.is_multiple_of(2) {
        Err(Error::InvalidBase(b))
    } else {
        Ok(())
    }
}
