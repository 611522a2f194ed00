//! REST endpoints.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/conversations` | `{description}`: generate a first model |
//! | POST | `/conversations/{id}/feedback` | `{feedback}`: refine the current model |
//! | GET | `/conversations/{id}/model` | `?format=powl-json\|pnml\|bpmn&version=n` |
//! | GET | `/conversations/{id}` | history, version summaries and turns |
//! | GET | `/conversations` | known ids |
//! | GET | `/health` | |
//!
//! Turns run on the blocking pool, so a slow provider never stalls
//! unrelated requests. Each conversation is locked for the length of a turn.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use promodel::orchestrator::{
    Conversation, Diagnostic, FailureKind, Orchestrator, OrchestratorError, Status, Turn, TurnKind,
};
use promodel::prompting::{ChatMessage, PromptError};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use uuid::Uuid;

use crate::store::{Store, StoreError};
use crate::Format;

#[derive(Clone)]
pub struct AppState {
    pub orchestrator: Arc<Orchestrator>,
    pub store: Arc<Store>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/conversations", post(create).get(list))
        .route("/conversations/{id}", get(show))
        .route("/conversations/{id}/feedback", post(feedback))
        .route("/conversations/{id}/model", get(model))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("no conversation {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, r.body_text())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl From<OrchestratorError> for ApiError {
    fn from(e: OrchestratorError) -> Self {
        let status = match &e {
            OrchestratorError::Prompt(PromptError::EmptyDescription | PromptError::EmptyFeedback) => {
                StatusCode::BAD_REQUEST
            }
            OrchestratorError::Prompt(_) => StatusCode::INTERNAL_SERVER_ERROR,
            OrchestratorError::NotSucceeded(_) => StatusCode::CONFLICT,
        };
        ApiError::new(status, e.to_string())
    }
}

#[derive(Debug, Deserialize)]
pub struct GenerateRequest {
    pub description: String,
}

#[derive(Debug, Deserialize)]
pub struct FeedbackRequest {
    pub feedback: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TurnSummary {
    pub kind: TurnKind,
    pub status: Status,
    pub failure: Option<FailureKind>,
    pub llm_calls: usize,
    pub critical_rounds: usize,
    pub adjustable_rounds: usize,
}

impl From<&Turn> for TurnSummary {
    fn from(t: &Turn) -> Self {
        TurnSummary {
            kind: t.kind.clone(),
            status: t.status,
            failure: t.failure,
            llm_calls: t.llm_calls,
            critical_rounds: t.critical_rounds,
            adjustable_rounds: t.adjustable_rounds,
        }
    }
}

/// Reply to both generation and feedback.
#[derive(Debug, Serialize, Deserialize)]
pub struct TurnResponse {
    pub id: Uuid,
    pub status: Status,
    /// Diagnostics of the turn that just ran.
    pub diagnostics: Vec<Diagnostic>,
    /// Current model as POWL JSON, absent when no version exists.
    pub model: Option<Value>,
    /// 1-based number of the current version.
    pub version: Option<usize>,
    pub turn: Option<TurnSummary>,
}

impl TurnResponse {
    fn of(conv: &Conversation) -> Self {
        let turn = conv.last_turn();
        TurnResponse {
            id: conv.id,
            status: conv.status,
            diagnostics: turn.map(|t| t.diagnostics.clone()).unwrap_or_default(),
            model: conv.current().map(|v| serde_json::to_value(&v.model).expect("models serialize")),
            version: (!conv.versions.is_empty()).then_some(conv.versions.len()),
            turn: turn.map(TurnSummary::from),
        }
    }

    /// 200 unless the turn failed: 502 when the provider did, 422 when the
    /// repair budget ran out.
    fn status_code(&self) -> StatusCode {
        match self.turn.as_ref().and_then(|t| t.failure) {
            None => StatusCode::OK,
            Some(FailureKind::Provider) => StatusCode::BAD_GATEWAY,
            Some(FailureKind::RetriesExhausted) => StatusCode::UNPROCESSABLE_ENTITY,
            Some(FailureKind::Cancelled) => StatusCode::SERVICE_UNAVAILABLE,
        }
    }
}

impl IntoResponse for TurnResponse {
    fn into_response(self) -> Response {
        (self.status_code(), Json(self)).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VersionSummary {
    pub version: usize,
    pub created_at: DateTime<Utc>,
    pub activities: Vec<String>,
    pub diagnostics: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConversationView {
    pub id: Uuid,
    pub status: Status,
    pub history: Vec<ChatMessage>,
    pub versions: Vec<VersionSummary>,
    pub turns: Vec<TurnSummary>,
}

impl ConversationView {
    fn of(conv: &Conversation) -> Self {
        ConversationView {
            id: conv.id,
            status: conv.status,
            history: conv.history.clone(),
            versions: conv
                .versions
                .iter()
                .enumerate()
                .map(|(i, v)| VersionSummary {
                    version: i + 1,
                    created_at: v.created_at,
                    activities: v.model.activity_labels().into_iter().map(String::from).collect(),
                    diagnostics: v.diagnostics.len(),
                })
                .collect(),
            turns: conv.turns.iter().map(TurnSummary::from).collect(),
        }
    }
}

fn parse_id(raw: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(raw).map_err(|_| ApiError::not_found(raw))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

async fn create(
    State(state): State<AppState>,
    body: Result<Json<GenerateRequest>, JsonRejection>,
) -> Result<TurnResponse, ApiError> {
    let Json(req) = body?;
    if req.description.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "description is empty"));
    }
    let orch = state.orchestrator.clone();
    let conv = blocking(move || orch.generate(&req.description)).await??;
    tracing::info!(id = %conv.id, status = ?conv.status, "generated");
    let resp = TurnResponse::of(&conv);
    state.store.insert(conv)?;
    Ok(resp)
}

async fn feedback(
    State(state): State<AppState>,
    Path(raw): Path<String>,
    body: Result<Json<FeedbackRequest>, JsonRejection>,
) -> Result<TurnResponse, ApiError> {
    let id = parse_id(&raw)?;
    let entry = state.store.get(&id).ok_or_else(|| ApiError::not_found(&raw))?;
    let Json(req) = body?;
    if req.feedback.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "feedback is empty"));
    }
    let orch = state.orchestrator.clone();
    let store = state.store.clone();
    blocking(move || {
        let mut conv = entry.lock().unwrap();
        orch.refine(&mut conv, &req.feedback)?;
        store.persist(&conv)?;
        tracing::info!(id = %conv.id, versions = conv.versions.len(), "refined");
        Ok(TurnResponse::of(&conv))
    })
    .await?
}

async fn show(State(state): State<AppState>, Path(raw): Path<String>) -> Result<Json<ConversationView>, ApiError> {
    let entry = state.store.get(&parse_id(&raw)?).ok_or_else(|| ApiError::not_found(&raw))?;
    let conv = entry.lock().unwrap();
    Ok(Json(ConversationView::of(&conv)))
}

async fn list(State(state): State<AppState>) -> Json<Vec<Uuid>> {
    Json(state.store.ids())
}

async fn model(
    State(state): State<AppState>,
    Path(raw): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let entry = state.store.get(&parse_id(&raw)?).ok_or_else(|| ApiError::not_found(&raw))?;
    let format = match query.get("format") {
        None => Format::PowlJson,
        Some(f) => Format::parse(f)
            .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, format!("unknown format '{f}'")))?,
    };
    let model = {
        let conv = entry.lock().unwrap();
        let version = match query.get("version") {
            None => conv.versions.len(),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, format!("bad version '{v}'")))?,
        };
        let v = version
            .checked_sub(1)
            .and_then(|i| conv.versions.get(i))
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no version {version} of {raw}")))?;
        v.model.clone()
    };
    let doc = format
        .render(&model)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], doc).into_response())
}

/// Binds `address` and serves until the process is stopped.
pub async fn serve(state: AppState, address: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(address).await?;
    tracing::info!(address = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}
