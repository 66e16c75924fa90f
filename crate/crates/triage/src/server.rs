use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use stance_core::network::{AnnotationDecision, TriageStats, Verdict};
use stance_core::Stance;

use crate::{DecisionLog, Error, TriageState};

pub const DEFAULT_LIMIT: usize = 20;

/// State plus the log that backs it. Decisions are serialized by the lock.
#[derive(Debug)]
pub struct Service {
    pub state: TriageState,
    pub log: DecisionLog,
}

pub type Shared = Arc<Mutex<Service>>;

/// Body of `POST /api/decisions`. The server stamps `decided_at`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub item_id: String,
    pub verdict: Verdict,
    pub annotator_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionResponse {
    pub decision: AnnotationDecision,
    pub stats: TriageStats,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

pub fn router(shared: Shared) -> Router {
    Router::new()
        .route("/api/queue", get(queue))
        .route("/api/decisions", post(decide))
        .route("/api/stats", get(stats))
        .with_state(shared)
}

pub async fn serve(listener: tokio::net::TcpListener, shared: Shared) -> std::io::Result<()> {
    axum::serve(listener, router(shared)).await
}

async fn queue(State(shared): State<Shared>, Query(params): Query<HashMap<String, String>>) -> Response {
    let class = match params.get("class").map(String::as_str) {
        None | Some("") | Some("all") => None,
        Some(c) => match c.parse::<Stance>() {
            Ok(s) if s.is_polarized() => Some(s),
            _ => return error(StatusCode::BAD_REQUEST, format!("unknown class {c:?}")),
        },
    };
    let limit = match params.get("limit") {
        None => DEFAULT_LIMIT,
        Some(l) => match l.parse::<usize>() {
            Ok(n) => n,
            Err(_) => return error(StatusCode::BAD_REQUEST, format!("bad limit {l:?}")),
        },
    };
    let service = shared.lock().expect("service lock");
    Json(service.state.queue(class, limit)).into_response()
}

async fn stats(State(shared): State<Shared>) -> Response {
    let service = shared.lock().expect("service lock");
    Json(*service.state.stats()).into_response()
}

fn now_ms() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as i64)
}

async fn decide(State(shared): State<Shared>, body: String) -> Response {
    let req: DecisionRequest = match serde_json::from_str(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed decision: {e}")),
    };
    let mut guard = shared.lock().expect("service lock");
    let service = &mut *guard;
    if service.state.item(&req.item_id).is_none() {
        return error(StatusCode::NOT_FOUND, format!("unknown item {}", req.item_id));
    }
    let decision = AnnotationDecision {
        item_id: req.item_id,
        verdict: req.verdict,
        annotator_id: req.annotator_id,
        decided_at: service.log.last_stamp().map_or(now_ms(), |t| t.max(now_ms())),
    };
    if let Err(e) = service.log.append(&decision) {
        tracing::error!(error = %e, "decision log append failed");
        return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string());
    }
    match service.state.apply(&decision) {
        Ok(stats) => Json(DecisionResponse {
            stats: *stats,
            decision,
        })
        .into_response(),
        Err(Error::UnknownItem(id)) => error(StatusCode::NOT_FOUND, format!("unknown item {id}")),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}
