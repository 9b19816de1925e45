use thiserror::Error;
use trustgrid_core::CoreError;

use crate::wire::SessionStatus;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("trial {0} does not exist")]
    UnknownTrial(u32),
    #[error("trial {0} has no searcher")]
    NoSearcher(u32),
    #[error("trial {got} requested but the session is at trial {expected}")]
    OutOfOrder { expected: u32, got: u32 },
    #[error("session is {0:?}")]
    NotActive(SessionStatus),
    #[error("status cannot move from {from:?} to {to:?}")]
    Transition {
        from: SessionStatus,
        to: SessionStatus,
    },
    #[error("trial {0} was already submitted with different content")]
    Conflict(u32),
    #[error("malformed frames: {0}")]
    Frames(String),
    #[error("invalid survey: {0}")]
    Survey(#[from] CoreError),
    #[error("storage: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt record in {file}: {source}")]
    Corrupt {
        file: String,
        source: serde_json::Error,
    },
    #[error("inconsistent stored session: {0}")]
    Inconsistent(String),
    #[error("config: {0}")]
    Config(String),
}

impl ServerError {
    /// Machine-readable code used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServerError::UnknownSession(_) => "unknown_session",
            ServerError::UnknownTrial(_) => "unknown_trial",
            ServerError::NoSearcher(_) => "no_searcher",
            ServerError::OutOfOrder { .. } => "out_of_order",
            ServerError::NotActive(_) => "not_active",
            ServerError::Transition { .. } => "bad_transition",
            ServerError::Conflict(_) => "conflict",
            ServerError::Frames(_) => "invalid_frames",
            ServerError::Survey(_) => "invalid_survey",
            ServerError::Io(_) | ServerError::Corrupt { .. } | ServerError::Inconsistent(_) => {
                "storage"
            }
            ServerError::Config(_) => "config",
        }
    }
}
