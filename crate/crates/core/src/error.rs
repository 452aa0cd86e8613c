use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no grid vertex is reachable by the chain")]
    EmptyWorkspace,

    #[error("no seed configuration could be projected onto the task graph")]
    NoSeeds,

    #[error("metric is undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error in {context}: {msg}")]
    Parse { context: String, msg: String },

    #[error("unsupported roadmap format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("robot hash mismatch: roadmap built for {expected}, got {found}")]
    HashMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, msg: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            msg: msg.to_string(),
        }
    }
}
