//! Local HTTP API.
//!
//! Reads go to an immutable snapshot of the workspace. A single writer task
//! owns the mutable workspace, and with it the annotation log and the
//! taxonomy file; handlers reach it through a channel and get the outcome
//! back on a oneshot. Each accepted mutation publishes a new snapshot.

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use advtax_core::annotation::Annotation;
use advtax_core::corpus::{CorpusFilter, DrivingMode};
use advtax_core::taxonomy;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tokio::sync::{mpsc, oneshot};

use crate::error::{Class, WorkspaceError};
use crate::workspace::{Recorded, Workspace};

/// Largest `k` accepted by the sample endpoint.
pub const MAX_SAMPLE: usize = 10_000;

#[derive(Debug, Clone, Deserialize)]
pub struct AmendRequest {
    pub leaf_id: String,
    pub definition: String,
    pub rationale: String,
    pub expected_version: u32,
}

enum WriteOp {
    Annotate(Annotation, oneshot::Sender<Result<Recorded, WorkspaceError>>),
    Amend(AmendRequest, oneshot::Sender<Result<String, WorkspaceError>>),
}

#[derive(Clone)]
struct AppState {
    snapshot: Arc<RwLock<Arc<Workspace>>>,
    writer: mpsc::Sender<WriteOp>,
}

impl AppState {
    fn read(&self) -> Arc<Workspace> {
        self.snapshot.read().expect("snapshot lock").clone()
    }
}

fn publish(slot: &RwLock<Arc<Workspace>>, ws: &Workspace) {
    *slot.write().expect("snapshot lock") = Arc::new(ws.clone());
}

async fn writer(mut ws: Workspace, slot: Arc<RwLock<Arc<Workspace>>>, mut rx: mpsc::Receiver<WriteOp>) {
    while let Some(op) = rx.recv().await {
        match op {
            WriteOp::Annotate(a, reply) => {
                let out = ws.record_annotation(a);
                if out.is_ok() {
                    publish(&slot, &ws);
                }
                let _ = reply.send(out);
            }
            WriteOp::Amend(req, reply) => {
                let out = ws
                    .amend(
                        &req.leaf_id,
                        &req.definition,
                        &req.rationale,
                        Some(req.expected_version),
                    )
                    .map(taxonomy::serialize);
                if out.is_ok() {
                    publish(&slot, &ws);
                }
                let _ = reply.send(out);
            }
        }
    }
}

struct ApiError(StatusCode, serde_json::Value);

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        let status = match e.class() {
            Class::Invalid => StatusCode::BAD_REQUEST,
            Class::NotFound => StatusCode::NOT_FOUND,
            Class::Conflict => StatusCode::CONFLICT,
            Class::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.body())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn bad_request(field: &str, message: impl Into<String>) -> ApiError {
    WorkspaceError::BadRequest {
        field: field.to_string(),
        message: message.into(),
    }
    .into()
}

fn writer_gone() -> ApiError {
    ApiError(
        StatusCode::SERVICE_UNAVAILABLE,
        json!({ "code": "WriterUnavailable", "message": "the workspace writer has stopped" }),
    )
}

type ApiResult<T> = Result<T, ApiError>;

fn json_document(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

async fn get_taxonomy(State(s): State<AppState>) -> Response {
    json_document(taxonomy::serialize(&s.read().taxonomy))
}

#[derive(Debug, Default, Deserialize)]
struct ReportQuery {
    from: Option<String>,
    to: Option<String>,
    mode: Option<String>,
    manufacturer: Option<String>,
}

fn parse_date(field: &str, s: Option<String>) -> ApiResult<Option<NaiveDate>> {
    s.map(|s| {
        NaiveDate::parse_from_str(&s, "%Y-%m-%d")
            .map_err(|e| bad_request(field, format!("`{s}` is not YYYY-MM-DD: {e}")))
    })
    .transpose()
}

async fn list_reports(
    State(s): State<AppState>,
    q: Result<Query<ReportQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<advtax_core::corpus::CollisionReport>>> {
    let Query(q) = q.map_err(|e| bad_request("query", e.body_text()))?;
    let mode = q
        .mode
        .map(|m| {
            serde_json::from_value::<DrivingMode>(json!(m))
                .map_err(|_| bad_request("mode", format!("unknown driving mode `{m}`")))
        })
        .transpose()?;
    let filter = CorpusFilter {
        from: parse_date("from", q.from)?,
        to: parse_date("to", q.to)?,
        mode,
        manufacturer: q.manufacturer,
    };
    Ok(Json(s.read().filter_reports(&filter)?))
}

async fn get_report(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(s.read().report_view(&id)?).into_response())
}

async fn get_suggestions(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(s.read().suggestions(&id)?).into_response())
}

async fn get_coverage(State(s): State<AppState>) -> ApiResult<Response> {
    Ok(Json(s.read().coverage(None)?).into_response())
}

#[derive(Debug, Deserialize)]
struct SampleQuery {
    k: Option<usize>,
    seed: Option<u64>,
}

async fn get_sample(State(s): State<AppState>, q: Result<Query<SampleQuery>, QueryRejection>) -> ApiResult<Response> {
    let Query(q) = q.map_err(|e| bad_request("query", e.body_text()))?;
    let k = q.k.ok_or_else(|| bad_request("k", "required"))?;
    if k > MAX_SAMPLE {
        return Err(bad_request("k", format!("at most {MAX_SAMPLE}")));
    }
    Ok(Json(s.read().sample(k, q.seed.unwrap_or(0))?).into_response())
}

async fn post_annotation(
    State(s): State<AppState>,
    body: Result<Json<Annotation>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(a) = body.map_err(|e| bad_request("body", e.body_text()))?;
    let (tx, rx) = oneshot::channel();
    s.writer
        .send(WriteOp::Annotate(a, tx))
        .await
        .map_err(|_| writer_gone())?;
    let recorded = rx.await.map_err(|_| writer_gone())??;
    Ok((StatusCode::CREATED, Json(recorded)).into_response())
}

async fn post_amend(State(s): State<AppState>, body: Result<Json<AmendRequest>, JsonRejection>) -> ApiResult<Response> {
    let Json(req) = body.map_err(|e| bad_request("body", e.body_text()))?;
    let (tx, rx) = oneshot::channel();
    s.writer
        .send(WriteOp::Amend(req, tx))
        .await
        .map_err(|_| writer_gone())?;
    let document = rx.await.map_err(|_| writer_gone())??;
    Ok(json_document(document))
}

async fn not_found() -> ApiError {
    ApiError(
        StatusCode::NOT_FOUND,
        json!({ "code": "NoRoute", "message": "no such endpoint" }),
    )
}

/// Build the API around `ws`. Spawns the writer task, so it must run inside
/// a Tokio runtime.
pub fn router(ws: Workspace) -> Router {
    let slot = Arc::new(RwLock::new(Arc::new(ws.clone())));
    let (tx, rx) = mpsc::channel(64);
    tokio::spawn(writer(ws, slot.clone(), rx));
    let state = AppState {
        snapshot: slot,
        writer: tx,
    };
    Router::new()
        .route("/api/taxonomy", get(get_taxonomy))
        .route("/api/taxonomy/amend", post(post_amend))
        .route("/api/reports", get(list_reports))
        .route("/api/reports/{id}", get(get_report))
        .route("/api/suggestions/{id}", get(get_suggestions))
        .route("/api/annotations", post(post_annotation))
        .route("/api/coverage", get(get_coverage))
        .route("/api/scenarios/sample", get(get_sample))
        .fallback(not_found)
        .with_state(state)
}

#[derive(Debug, Error, Serialize)]
pub enum ServeError {
    #[error("refusing to listen on non-loopback address {0}; pass --allow-remote to override")]
    NonLoopback(SocketAddr),
}

pub fn check_bind(addr: SocketAddr, allow_remote: bool) -> Result<(), ServeError> {
    if addr.ip().is_loopback() || allow_remote {
        Ok(())
    } else {
        Err(ServeError::NonLoopback(addr))
    }
}

/// Bind and serve until Ctrl-C. `on_ready` receives the bound address.
pub async fn serve(ws: Workspace, addr: SocketAddr, on_ready: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_ready(listener.local_addr()?);
    axum::serve(listener, router(ws))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
