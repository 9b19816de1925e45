//! HTTP routes over [`Service`].
//!
//! | method | path                                   | body            | response        |
//! |--------|----------------------------------------|-----------------|-----------------|
//! | GET    | `/health`                              |                 | `ok`            |
//! | GET    | `/config`                              |                 | world + prompts |
//! | POST   | `/sessions?synthetic=true`             |                 | `SessionRecord` |
//! | GET    | `/sessions/{id}`                       |                 | `SessionRecord` |
//! | GET    | `/sessions/{id}/trials/{index}`        |                 | `TrialView`     |
//! | POST   | `/sessions/{id}/trials/{index}/frames` | `FrameBatch`    | `BatchAck`      |
//! | GET    | `/sessions/{id}/trials/{index}/report` |                 | `ReportLine`    |
//! | POST   | `/sessions/{id}/trials/{index}/submit` | `SubmitRequest` | `TrialResult`   |
//! | GET    | `/sessions/{id}/score`                 |                 | `ScoreView`     |
//! | POST   | `/sessions/{id}/abandon`               |                 | `SessionRecord` |
//! | GET    | `/export?frames=&group=&status=&session_id=` |           | NDJSON `ExportRecord` lines |
//!
//! Errors are `ErrorBody` JSON with 404 (unknown session or trial),
//! 409 (ordering, status or duplicate conflicts), 422 (invalid frames or
//! survey) or 500 (storage).

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use trustgrid_core::{Questionnaire, WorldConfig};

use crate::error::ServerError;
use crate::service::Service;
use crate::wire::{ErrorBody, ExportFilter, FrameBatch, NewSession, SubmitRequest};

impl IntoResponse for ServerError {
    fn into_response(self) -> Response {
        let status = match self {
            ServerError::UnknownSession(_)
            | ServerError::UnknownTrial(_)
            | ServerError::NoSearcher(_) => StatusCode::NOT_FOUND,
            ServerError::OutOfOrder { .. }
            | ServerError::NotActive(_)
            | ServerError::Transition { .. }
            | ServerError::Conflict(_) => StatusCode::CONFLICT,
            ServerError::Frames(_) | ServerError::Survey(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServerError::Io(_)
            | ServerError::Corrupt { .. }
            | ServerError::Inconsistent(_)
            | ServerError::Config(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        (
            status,
            Json(ErrorBody {
                error: self.code().into(),
                message: self.to_string(),
            }),
        )
            .into_response()
    }
}

type Shared = State<Arc<Service>>;
type ApiResult<T> = Result<Json<T>, ServerError>;

#[derive(Serialize)]
struct PublicConfig<'a> {
    world: &'a WorldConfig,
    questionnaire: &'a Questionnaire,
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/config", get(config))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session))
        .route("/sessions/{id}/trials/{index}", get(trial))
        .route("/sessions/{id}/trials/{index}/frames", post(frames))
        .route("/sessions/{id}/trials/{index}/report", get(report))
        .route("/sessions/{id}/trials/{index}/submit", post(submit))
        .route("/sessions/{id}/score", get(score))
        .route("/sessions/{id}/abandon", post(abandon))
        .route("/export", get(export))
        .with_state(service)
}

async fn config(State(svc): Shared) -> Response {
    Json(PublicConfig {
        world: &svc.config().world,
        questionnaire: svc.questionnaire(),
    })
    .into_response()
}

async fn create_session(
    State(svc): Shared,
    Query(opts): Query<NewSession>,
) -> Result<(StatusCode, Json<crate::wire::SessionRecord>), ServerError> {
    Ok((StatusCode::CREATED, Json(svc.create_session_with(opts)?)))
}

async fn session(
    State(svc): Shared,
    Path(id): Path<String>,
) -> ApiResult<crate::wire::SessionRecord> {
    Ok(Json(svc.session_record(&id)?))
}

async fn trial(
    State(svc): Shared,
    Path((id, index)): Path<(String, u32)>,
) -> ApiResult<crate::wire::TrialView> {
    Ok(Json(svc.get_trial(&id, index)?))
}

async fn frames(
    State(svc): Shared,
    Path((id, index)): Path<(String, u32)>,
    Json(batch): Json<FrameBatch>,
) -> ApiResult<crate::wire::BatchAck> {
    Ok(Json(svc.stage_frames(&id, index, batch.frames.0)?))
}

async fn report(
    State(svc): Shared,
    Path((id, index)): Path<(String, u32)>,
) -> ApiResult<crate::wire::ReportLine> {
    Ok(Json(svc.report_line(&id, index)?))
}

async fn submit(
    State(svc): Shared,
    Path((id, index)): Path<(String, u32)>,
    Json(req): Json<SubmitRequest>,
) -> ApiResult<crate::wire::TrialResult> {
    Ok(Json(svc.submit_trial(&id, index, req)?))
}

async fn score(State(svc): Shared, Path(id): Path<String>) -> ApiResult<crate::wire::ScoreView> {
    Ok(Json(svc.score(&id)?))
}

async fn abandon(
    State(svc): Shared,
    Path(id): Path<String>,
) -> ApiResult<crate::wire::SessionRecord> {
    Ok(Json(svc.abandon(&id)?))
}

async fn export(
    State(svc): Shared,
    Query(filter): Query<ExportFilter>,
) -> Result<Response, ServerError> {
    let mut body = Vec::new();
    svc.write_export(&filter, &mut body)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}
