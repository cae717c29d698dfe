//! HTTP API: `POST /api/predict`, `GET /api/examples`, `GET /api/health`,
//! and optionally the UI bundle as static files.
//!
//! Errors are JSON: `{"error": {"code": "empty_text", "message": "..."}}`.
//! No endpoint takes a threshold; the verdict is the client's business.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dialect_audit_core::{builtin_minimal_pairs, Scorer};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use crate::scoring::LoadedScorer;

pub const DEFAULT_MAX_TEXT_CHARS: usize = 5_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub max_text_chars: usize,
    /// Allowed origins; `None` allows any origin.
    pub cors_origins: Option<Vec<String>>,
    /// Directory of the built UI, served under `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { max_text_chars: DEFAULT_MAX_TEXT_CHARS, cors_origins: None, static_dir: None }
    }
}

#[derive(Clone)]
struct AppState {
    scorer: Arc<LoadedScorer>,
    examples: Bytes,
    max_text_chars: usize,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status, code, message: message.into() }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

fn cors_layer(origins: Option<&[String]>) -> Result<CorsLayer, String> {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Ok(match origins {
        None => layer.allow_origin(AllowOrigin::any()),
        Some(list) => {
            let values = list
                .iter()
                .map(|o| HeaderValue::from_str(o).map_err(|_| format!("invalid CORS origin {o:?}")))
                .collect::<Result<Vec<_>, _>>()?;
            layer.allow_origin(AllowOrigin::list(values))
        }
    })
}

/// Builds the application router around a loaded scorer.
pub fn router(scorer: Arc<LoadedScorer>, config: &ServiceConfig) -> Result<Router, String> {
    let examples = serde_json::to_vec(&builtin_minimal_pairs()).map_err(|e| e.to_string())?;
    let state = AppState { scorer, examples: Bytes::from(examples), max_text_chars: config.max_text_chars };
    let api = Router::new()
        .route("/api/predict", post(predict))
        .route("/api/predict/", post(predict))
        .route("/api/examples", get(examples_handler))
        .route("/api/examples/", get(examples_handler))
        .route("/api/health", get(health))
        .route("/api/health/", get(health))
        .with_state(state);
    let app = match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async {
            ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
        }),
    };
    Ok(app.layer(cors_layer(config.cors_origins.as_deref())?))
}

async fn predict(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let value: serde_json::Value = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request("malformed_json", format!("request body is not valid JSON: {e}")))?;
    let text = match value.get("text") {
        None => return Err(ApiError::bad_request("missing_text", "request must have a \"text\" field")),
        Some(serde_json::Value::String(s)) => s.clone(),
        Some(_) => return Err(ApiError::bad_request("invalid_text", "\"text\" must be a string")),
    };
    if text.trim().is_empty() {
        return Err(ApiError::bad_request("empty_text", "\"text\" is empty"));
    }
    let chars = text.chars().count();
    if chars > state.max_text_chars {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "text_too_long",
            format!("text has {chars} characters; the limit is {}", state.max_text_chars),
        ));
    }
    let scorer = state.scorer.clone();
    let scores = tokio::task::spawn_blocking(move || scorer.score(&text))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "scoring_failed", e.to_string()))?
        .map_err(|e| {
            log::error!("scoring failed: {e}");
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "scoring_failed", e.to_string())
        })?;
    Ok(Json(scores).into_response())
}

async fn examples_handler(State(state): State<AppState>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], state.examples.clone()).into_response()
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "backend": state.scorer.backend(),
        "model_digest": state.scorer.model_digest(),
        "version": env!("CARGO_PKG_VERSION"),
    }))
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, app: Router) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        })
        .await
}
