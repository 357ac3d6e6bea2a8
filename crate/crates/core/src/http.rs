//! HTTP API over a [`GraphStore`].
//!
//! | Method | Path                     | Body / query                      |
//! |--------|--------------------------|-----------------------------------|
//! | POST   | `/api/query`             | `{tenant?, query, params?}`       |
//! | GET    | `/api/schema`            | `?tenant=T`                       |
//! | POST   | `/api/snapshot/import`   | `?tenant=T`, gzip snapshot bytes  |
//! | GET    | `/api/snapshot/export`   | `?tenant=T`                       |
//! | POST   | `/api/index`             | `{tenant?, label, property}`      |
//! | GET    | `/api/tenants`           |                                   |
//! | POST   | `/api/tenants`           | `{name}`                          |
//! | GET    | `/health`                |                                   |
//!
//! A missing tenant selector means `default`. Errors use the envelope
//! `{"error": {"code", "message", "line"?, "column"?}}`.

use std::io;
use std::net::{SocketAddr, TcpListener as StdListener};
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};
use tokio::sync::oneshot;

use crate::cypher::{self, CypherError};
use crate::graph::{GraphError, GraphStore, TenantHandle};
use crate::snapshot::{self, ImportConfig, SnapshotError};

pub const DEFAULT_TENANT: &str = "default";

/// Upper bound on request bodies, snapshot uploads included.
pub const MAX_BODY_BYTES: usize = 2 << 30;

/// Error response with a stable machine-readable code.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub line: Option<u64>,
    pub column: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            line: None,
            column: None,
        }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut err = json!({"code": self.code, "message": self.message});
        if let Some(l) = self.line {
            err["line"] = json!(l);
        }
        if let Some(c) = self.column {
            err["column"] = json!(c);
        }
        (self.status, Json(json!({ "error": err }))).into_response()
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        let (status, code) = match &e {
            GraphError::UnknownTenant(_) => (StatusCode::NOT_FOUND, "unknown-tenant"),
            GraphError::DuplicateTenant(_) => (StatusCode::CONFLICT, "duplicate-tenant"),
            GraphError::EmptyTenantName => (StatusCode::BAD_REQUEST, "invalid-tenant-name"),
            _ => (StatusCode::BAD_REQUEST, "invalid-graph-operation"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<CypherError> for ApiError {
    fn from(e: CypherError) -> Self {
        let status = match e {
            CypherError::MissingParameter(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        let mut out = ApiError::new(status, e.kind(), e.to_string());
        if let Some(pos) = e.position() {
            out.line = Some(pos.line as u64);
            out.column = Some(pos.column as u64);
        }
        out
    }
}

impl From<SnapshotError> for ApiError {
    fn from(e: SnapshotError) -> Self {
        let mut out = match &e {
            SnapshotError::Io(_) => ApiError::bad_request("malformed-snapshot", e.to_string()),
            SnapshotError::Graph(_) => ApiError::bad_request("invalid-graph-operation", e.to_string()),
            _ => ApiError::bad_request("malformed-snapshot", e.to_string()),
        };
        out.line = e.line();
        out
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
struct AppState {
    store: Arc<GraphStore>,
}

impl AppState {
    fn tenant(&self, name: Option<&str>) -> ApiResult<TenantHandle> {
        Ok(self.store.tenant(name.unwrap_or(DEFAULT_TENANT))?)
    }
}

/// Runs blocking graph work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid-request", e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryRequest {
    #[serde(default)]
    tenant: Option<String>,
    query: String,
    #[serde(default)]
    params: JsonValue,
}

#[derive(Deserialize)]
struct TenantParam {
    tenant: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateTenant {
    name: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexRequest {
    #[serde(default)]
    tenant: Option<String>,
    label: String,
    property: String,
}

async fn query(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<JsonValue>> {
    let req: QueryRequest = parse_body(&body)?;
    if req.query.trim().is_empty() {
        return Err(ApiError::bad_request("empty-query", "query must be non-empty"));
    }
    let tenant = state.tenant(req.tenant.as_deref())?;
    let params = cypher::params_from_json(&req.params).map_err(|m| ApiError::bad_request("invalid-parameter", m))?;
    let table = blocking(move || Ok(cypher::execute_text(&tenant, &req.query, &params)?)).await?;
    Ok(Json(table.to_json()))
}

async fn schema(State(state): State<AppState>, Query(q): Query<TenantParam>) -> ApiResult<Json<JsonValue>> {
    let tenant = state.tenant(q.tenant.as_deref())?;
    let schema = tenant.read().schema();
    Ok(Json(serde_json::to_value(schema).map_err(|e| ApiError::internal(e.to_string()))?))
}

async fn snapshot_import(
    State(state): State<AppState>,
    Query(q): Query<TenantParam>,
    body: Bytes,
) -> ApiResult<Json<JsonValue>> {
    let tenant = state.tenant(q.tenant.as_deref())?;
    if body.is_empty() {
        return Err(ApiError::bad_request("empty-body", "request body must be a gzip snapshot"));
    }
    let stats = blocking(move || Ok(snapshot::import_into_tenant(&tenant, &body[..], &ImportConfig::default())?)).await?;
    Ok(Json(json!(stats)))
}

async fn snapshot_export(State(state): State<AppState>, Query(q): Query<TenantParam>) -> ApiResult<Response> {
    let tenant = state.tenant(q.tenant.as_deref())?;
    let bytes = blocking(move || {
        let mut out = Vec::new();
        snapshot::export_tenant(&tenant, &mut out).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(out)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "application/gzip")], bytes).into_response())
}

async fn declare_index(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<JsonValue>> {
    let req: IndexRequest = parse_body(&body)?;
    if req.label.is_empty() || req.property.is_empty() {
        return Err(ApiError::bad_request("invalid-request", "label and property must be non-empty"));
    }
    let tenant = state.tenant(req.tenant.as_deref())?;
    blocking(move || {
        tenant.write().declare_index(&req.label, &req.property);
        Ok(Json(json!({"label": req.label, "property": req.property, "indexed": true})))
    })
    .await
}

async fn list_tenants(State(state): State<AppState>) -> Json<JsonValue> {
    Json(json!({ "tenants": state.store.list_tenants() }))
}

async fn create_tenant(State(state): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<JsonValue>)> {
    let req: CreateTenant = parse_body(&body)?;
    state.store.create_tenant(&req.name)?;
    Ok((StatusCode::CREATED, Json(json!({ "name": req.name }))))
}

async fn health(State(state): State<AppState>) -> Json<JsonValue> {
    Json(json!({"status": "ok", "tenants": state.store.tenant_count()}))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint")
}

pub fn router(store: Arc<GraphStore>) -> Router {
    Router::new()
        .route("/api/query", post(query))
        .route("/api/schema", get(schema))
        .route("/api/snapshot/import", post(snapshot_import))
        .route("/api/snapshot/export", get(snapshot_export))
        .route("/api/index", post(declare_index))
        .route("/api/tenants", get(list_tenants).post(create_tenant))
        .route("/health", get(health))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(AppState { store })
}

/// A server running on its own thread until shut down or dropped.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL like `http://127.0.0.1:7070`.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server stops.
    pub fn wait(mut self) -> io::Result<()> {
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }

    pub fn shutdown(mut self) -> io::Result<()> {
        self.stop()
    }

    fn stop(&mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}

/// Binds `addr` (port 0 picks a free port) and serves on a background
/// thread. Binding errors such as a port in use are returned here.
pub fn spawn(store: Arc<GraphStore>, addr: &str) -> io::Result<ServerHandle> {
    let listener = StdListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let local = listener.local_addr()?;
    let (tx, rx) = oneshot::channel::<()>();
    let thread = std::thread::Builder::new().name("kgfed-http".into()).spawn(move || {
        let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)?;
            axum::serve(listener, router(store))
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
        })
    })?;
    Ok(ServerHandle {
        addr: local,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
