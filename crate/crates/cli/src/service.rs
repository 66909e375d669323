//! HTTP annotation service over a [`DocStore`].
//!
//! Annotation reads return an `ETag` holding the version token of the
//! stored bytes; writes must send it back in `If-Match`.

use std::collections::HashMap;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde_json::json;
use tableparse::doctree;

use crate::store::{version_token, DocStore};

const EMBEDDED_UI: &str = include_str!("ui.html");

pub struct AppState {
    pub store: DocStore,
    /// Serve `GET /` from this directory instead of the embedded page.
    pub ui_dir: Option<PathBuf>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(store: DocStore, ui_dir: Option<PathBuf>) -> Self {
        AppState {
            store,
            ui_dir,
            locks: Mutex::new(HashMap::new()),
        }
    }

    fn doc_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/docs", get(list_docs))
        .route(
            "/api/docs/{id}/annotation",
            get(get_annotation).put(put_annotation),
        )
        .route("/api/docs/{id}/pages/{page}", get(get_page))
        .route("/{*path}", get(static_file))
        .with_state(state)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn io_error(e: std::io::Error) -> Response {
    error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

fn etag(token: &str) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{token}\"")).expect("hex is a valid header value")
}

async fn list_docs(State(state): State<Arc<AppState>>) -> Response {
    match state.store.ids() {
        Ok(ids) => Json(ids).into_response(),
        Err(e) => io_error(e),
    }
}

async fn get_annotation(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Response {
    match state.store.read_annotation(&id) {
        Ok(Some(bytes)) => {
            let tag = etag(&version_token(&bytes));
            (
                [
                    (
                        header::CONTENT_TYPE,
                        HeaderValue::from_static("application/json; charset=utf-8"),
                    ),
                    (header::ETAG, tag),
                ],
                bytes,
            )
                .into_response()
        }
        Ok(None) => error(StatusCode::NOT_FOUND, format!("unknown document {id}")),
        Err(e) => io_error(e),
    }
}

async fn put_annotation(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let Some(if_match) = headers.get(header::IF_MATCH) else {
        return error(
            StatusCode::PRECONDITION_REQUIRED,
            "If-Match version token required",
        );
    };
    let wanted = if_match
        .to_str()
        .unwrap_or("")
        .trim()
        .trim_start_matches("W/")
        .trim_matches('"')
        .to_string();

    let lock = state.doc_lock(&id);
    let _guard = lock.lock().await;
    let current = match state.store.read_annotation(&id) {
        Ok(Some(b)) => b,
        Ok(None) => return error(StatusCode::NOT_FOUND, format!("unknown document {id}")),
        Err(e) => return io_error(e),
    };
    let current_token = version_token(&current);
    if wanted != current_token {
        let mut resp = error(StatusCode::CONFLICT, "stale version token");
        resp.headers_mut()
            .insert(header::ETAG, etag(&current_token));
        return resp;
    }
    let tree = match doctree::parse_annotation(&body) {
        Ok(t) => t,
        Err(e) => {
            return (
                StatusCode::UNPROCESSABLE_ENTITY,
                Json(json!({ "error": e.to_string(), "violations": [] })),
            )
                .into_response()
        }
    };
    let violations = doctree::validate(&tree);
    if !violations.is_empty() {
        return (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(json!({ "error": "annotation fails validation", "violations": violations })),
        )
            .into_response();
    }
    if let Err(e) = state.store.write_annotation(&id, &body) {
        return io_error(e);
    }
    let token = version_token(&body);
    let mut resp = Json(json!({ "version": token })).into_response();
    resp.headers_mut().insert(header::ETAG, etag(&token));
    resp
}

async fn get_page(
    State(state): State<Arc<AppState>>,
    UrlPath((id, page)): UrlPath<(String, u32)>,
) -> Response {
    match state.store.read_page(&id, page) {
        Ok(Some(bytes)) => ([(header::CONTENT_TYPE, "image/png")], bytes).into_response(),
        Ok(None) => error(
            StatusCode::NOT_FOUND,
            format!("no page {page} for document {id}"),
        ),
        Err(e) => io_error(e),
    }
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("json") => "application/json; charset=utf-8",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("wasm") => "application/wasm",
        _ => "application/octet-stream",
    }
}

async fn index(State(state): State<Arc<AppState>>) -> Response {
    match &state.ui_dir {
        Some(_) => serve_ui_file(&state, "index.html"),
        None => (
            [(header::CONTENT_TYPE, "text/html; charset=utf-8")],
            EMBEDDED_UI,
        )
            .into_response(),
    }
}

async fn static_file(
    State(state): State<Arc<AppState>>,
    UrlPath(path): UrlPath<String>,
) -> Response {
    if state.ui_dir.is_none() {
        return error(StatusCode::NOT_FOUND, "not found");
    }
    serve_ui_file(&state, &path)
}

fn serve_ui_file(state: &AppState, rel: &str) -> Response {
    let Some(dir) = &state.ui_dir else {
        return error(StatusCode::NOT_FOUND, "not found");
    };
    let rel = Path::new(rel);
    if !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return error(StatusCode::NOT_FOUND, "not found");
    }
    let path = dir.join(rel);
    match std::fs::read(&path) {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response(),
        Err(_) => error(StatusCode::NOT_FOUND, "not found"),
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(state: Arc<AppState>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "serving {} on http://{}",
        state.store.root().display(),
        listener.local_addr()?
    );
    axum::serve(listener, router(state)).await
}
