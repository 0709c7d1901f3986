use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid digit set: {0}")]
    InvalidDigitSet(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("requires a sparse digit set")]
    NotSparse,
    #[error("requires a uniform digit set")]
    NotUniform,
    #[error("translation is not in the difference set F: {0}")]
    NotInF(String),
    #[error("value not representable: {0}")]
    NotRepresentable(String),
    #[error("sigma is not +1/-1 at level {0}")]
    SigmaNotPM(usize),
    #[error("translation has a finite base-n representation")]
    FiniteRepresentation,
    #[error("budget exceeded: {needed} intervals requested, budget {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("prefix-only code: verdict is depth-bounded")]
    UndecidedPrefix,
    #[error("bad delta: {0}")]
    BadDelta(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    /// Exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 1,
            Error::BudgetExceeded { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
