use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ledger: {0}")]
    InvalidLedger(String),

    #[error("{name} out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ill-posed execution model: temporary coefficient {eta} must exceed gamma*tau/2 = {bound}")]
    IllPosed { eta: f64, bound: f64 },

    #[error("inadmissible trajectory: {0}")]
    InadmissibleTrajectory(String),

    #[error("insufficient shares: need {need}, got {got}")]
    InsufficientShares { need: usize, got: usize },

    #[error("duplicate share index {0}")]
    DuplicateShare(u8),

    #[error("malformed share: {0}")]
    MalformedShare(String),

    #[error("event {event} not accepted in terminal state {state}")]
    TerminalState { state: String, event: String },

    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),

    #[error("missing class: {0}")]
    MissingClass(String),

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error("unknown {kind}: {name}")]
    Unknown { kind: &'static str, name: String },

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    /// Process exit code for this error class: 2 validation, 3 unknown entity,
    /// 4 computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unknown { .. } => 3,
            Error::IllPosed { .. }
            | Error::InsufficientShares { .. }
            | Error::TerminalState { .. }
            | Error::MissingClass(_) => 4,
            _ => 2,
        }
    }

    pub(crate) fn out_of_range(name: &'static str, value: f64) -> Self {
        Error::OutOfRange { name, value }
    }
}
