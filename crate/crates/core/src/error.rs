use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid system spec at {path}: {message}")]
    InvalidSpec { path: String, message: String },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("negative iterate {0} on a one-sided system")]
    NegativeIterateOnOneSided(i64),

    #[error("points belong to different systems")]
    SystemMismatch,

    #[error("orbit sequence has rank {rank} but the gap has {gaps} entries")]
    RankMismatch { rank: usize, gaps: usize },

    #[error("operation requires a subshift of finite type")]
    NotAnSft,

    #[error("a non-empty candidate pool is required for this system")]
    PoolRequired,

    #[error("empty pool")]
    EmptyPool,

    #[error("{0} is not supported for this system")]
    Unsupported(&'static str),

    #[error("system is not minimal")]
    NotMinimal,

    #[error("system is not finite")]
    NotFinite,

    #[error("stay-away condition violated: {0}")]
    StayAwayViolated(String),

    #[error("gluing failed: {0}")]
    GluingFailed(String),

    #[error("bad arguments: {0}")]
    BadArgs(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn spec(path: impl Into<String>, message: impl Into<String>) -> Error {
        Error::InvalidSpec { path: path.into(), message: message.into() }
    }
}
