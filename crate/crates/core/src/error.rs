use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall in two families: configuration problems (bad tokens,
/// out-of-range parameters, unreadable files) and numerical preconditions
/// that the inputs failed to meet (non-regular priors, empty posteriors).
/// [`Error::exit_code`] maps each family to the CLI exit status.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse prior token at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("prior is not regular: virtual value decreases near v = {at}")]
    NotRegular { at: f64 },

    #[error("thresholds need at most two sign changes of the scaled virtual value, found {sign_changes}")]
    NotLogConcave { sign_changes: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("singular payment system: {0}")]
    Singular(String),

    #[error("hybrid reserve policy must be resolved against revenue estimates first")]
    UnresolvedHybrid,
}

impl Error {
    /// Process exit status used by the CLI: 2 for configuration errors and
    /// 3 for numerical precondition failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Parse { .. } | Error::Config(_) => 2,
            Error::UnresolvedHybrid => 2,
            Error::NotRegular { .. }
            | Error::NotLogConcave { .. }
            | Error::Numerical(_)
            | Error::Singular(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
