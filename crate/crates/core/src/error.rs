use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Caller supplied an argument outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),
    /// A required collaborator (policy, student, dataset) is missing.
    #[error("configuration error: {0}")]
    Config(String),
    /// Training produced a non-finite loss.
    #[error("training diverged at step {step}: {reason}")]
    Training { step: u64, reason: String },
    /// A tree violates its structural invariants.
    #[error("model integrity error: {0}")]
    ModelIntegrity(String),
    /// Request would exceed a hard resource bound.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! input_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Input(alloc::format!($($arg)*))
    };
}
pub(crate) use input_err;

/// Checks that `got` matches the expected state dimension.
pub(crate) fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(input_err!("{what}: expected dimension {expected}, got {got}"));
    }
    Ok(())
}
