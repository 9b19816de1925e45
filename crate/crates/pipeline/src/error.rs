use std::path::PathBuf;

use thiserror::Error;
use trustgrid_core::{CoreError, Group};
use trustgrid_server::ServerError;
use trustgrid_stats::StatsError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Layout { line: usize, message: String },
    #[error("no kept sessions in group {0}")]
    EmptyGroup(Group),
    #[error("series for {expected} is labelled {got}")]
    GroupMismatch { expected: Group, got: Group },
    #[error("sessions mix experiment seeds {0} and {1}")]
    MixedSeeds(u64, u64),
    #[error("session {session_id}: {message}")]
    Session { session_id: String, message: String },
    #[error("report is incomplete: {0}")]
    IncompleteReport(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Server(#[from] ServerError),
}
