use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong length, bad subset, odd `H_p`...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sample outside expected support: {0}")]
    OutsideSupport(String),

    #[error("anonymity audit refused: {0}")]
    AuditRefused(String),

    #[error("malformed stream file: {0}")]
    StreamFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

macro_rules! contract {
    ($cond:expr, $($arg:tt)+) => {{
        let holds: bool = $cond;
        if !holds {
            return Err($crate::error::Error::ContractViolation(format!($($arg)+)));
        }
    }};
}
pub(crate) use contract;
