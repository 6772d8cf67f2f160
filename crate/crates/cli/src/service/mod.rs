//! Session-oriented JSON API over HTTP. Every payload carries `"v": 1`.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/health` | liveness |
//! | POST | `/session` | open a session from `{manifest}` or `{manifest_path}` |
//! | GET, DELETE | `/session/{id}` | summary / close |
//! | PUT | `/session/{id}/weights` | `{alphas}`; relayout of the sample |
//! | GET | `/session/{id}/grid` | current sample grid |
//! | GET | `/session/{id}/features/{name}/grid` | sample grid of one feature set |
//! | POST | `/session/{id}/full-grid` | `{delta}`; layout of the whole collection |
//! | GET | `/session/{id}/compressed?R&S` | compressed full grid |
//! | GET | `/session/{id}/cell/{I}/{J}/members?R&S` | members of one coarse cell |
//! | GET | `/session/{id}/expand?I&J&R&S` | row/column expansion plan |
//!
//! Anything else is served from the data directory as static files.

mod session;

use std::collections::HashMap;
use std::future::Future;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use dgrid::multiscale::{expand_context, CompressedGridJson, ExpansionPlan, Member};
use dgrid::projection::BundleManifest;
use dgrid::{GridAssignment, WeightVector};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

pub use session::{FullGrid, Session, SessionSource, Snapshot};

/// Tolerance on the weight sum accepted from clients.
pub const WEIGHT_TOL: f64 = 1e-6;
const SNAPSHOT_FILE: &str = "sessions.json";

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

struct Inner {
    data_dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl AppState {
    pub fn new(data_dir: Option<PathBuf>) -> Self {
        AppState(Arc::new(Inner {
            data_dir,
            sessions: RwLock::new(HashMap::new()),
        }))
    }

    pub fn session(&self, id: &str) -> Option<Arc<Session>> {
        self.0.sessions.read().get(id).cloned()
    }

    pub fn session_count(&self) -> usize {
        self.0.sessions.read().len()
    }

    fn base_dir(&self) -> PathBuf {
        self.0.data_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn snapshot_path(&self) -> Option<PathBuf> {
        self.0.data_dir.as_ref().map(|d| d.join(SNAPSHOT_FILE))
    }

    /// Writes every session's source, weights and revision to the data dir.
    pub fn persist(&self) -> anyhow::Result<Option<PathBuf>> {
        let Some(path) = self.snapshot_path() else {
            return Ok(None);
        };
        let mut sessions: Vec<PersistedSession> = self
            .0
            .sessions
            .read()
            .values()
            .map(|s| {
                let snap = s.snapshot();
                PersistedSession {
                    id: s.id.clone(),
                    source: s.source.clone(),
                    weights: snap.weights.as_slice().to_vec(),
                    revision: snap.revision,
                    full_delta: snap.full.as_ref().map(|f| f.delta),
                }
            })
            .collect();
        sessions.sort_by(|a, b| a.id.cmp(&b.id));
        let body = serde_json::to_string_pretty(&json!({"v": 1, "sessions": sessions}))?;
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(Some(path))
    }

    /// Reopens the sessions of a previous snapshot, if one exists.
    pub async fn restore(&self) -> anyhow::Result<usize> {
        let Some(path) = self.snapshot_path().filter(|p| p.exists()) else {
            return Ok(0);
        };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let file: PersistedFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut restored = 0;
        for p in file.sessions {
            let id = p.id.clone();
            let s = tokio::task::spawn_blocking(move || -> dgrid::Result<Session> {
                let s = Session::open(p.id, p.source)?;
                s.set_weights(WeightVector::normalized(p.weights, WEIGHT_TOL)?)?;
                if let Some(d) = p.full_delta {
                    s.build_full(d)?;
                }
                s.set_revision(p.revision);
                Ok(s)
            })
            .await?;
            match s {
                Ok(s) => {
                    self.0.sessions.write().insert(id, Arc::new(s));
                    restored += 1;
                }
                Err(e) => eprintln!("warning: session {id} not restored: {e}"),
            }
        }
        Ok(restored)
    }
}

#[derive(Serialize, Deserialize)]
struct PersistedSession {
    id: String,
    source: SessionSource,
    weights: Vec<f64>,
    revision: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    full_delta: Option<f64>,
}

#[derive(Deserialize)]
struct PersistedFile {
    #[allow(dead_code)]
    v: u32,
    sessions: Vec<PersistedSession>,
}

pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn not_found(what: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, what)
    }
}

impl From<dgrid::Error> for ApiError {
    fn from(e: dgrid::Error) -> Self {
        let status = match e {
            dgrid::Error::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<tokio::task::JoinError> for ApiError {
    fn from(e: tokio::task::JoinError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"v": 1, "error": self.message}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn check_version(v: Option<u32>) -> ApiResult<()> {
    match v {
        None | Some(1) => Ok(()),
        Some(other) => Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unsupported payload version {other}"))),
    }
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/session", post(create_session))
        .route("/session/{id}", get(session_summary).delete(delete_session))
        .route("/session/{id}/weights", put(put_weights))
        .route("/session/{id}/grid", get(sample_grid))
        .route("/session/{id}/features/{name}/grid", get(feature_grid))
        .route("/session/{id}/full-grid", post(full_grid))
        .route("/session/{id}/compressed", get(compressed))
        .route("/session/{id}/cell/{i}/{j}/members", get(cell_members))
        .route("/session/{id}/expand", get(expand))
        .with_state(state.clone());
    match &state.0.data_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until `shutdown` resolves, then persists sessions.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    if let Some(path) = state.persist()? {
        println!("sessions saved to {}", path.display());
    }
    Ok(())
}

pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"v": 1, "status": "ok"}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub v: Option<u32>,
    #[serde(default)]
    pub manifest: Option<BundleManifest>,
    /// Manifest file, relative to the data dir.
    #[serde(default)]
    pub manifest_path: Option<String>,
    #[serde(default)]
    pub assets: Option<String>,
}

#[derive(Serialize)]
struct SessionInfo {
    v: u32,
    session: String,
    feature_sets: Vec<String>,
    n: usize,
    sample_size: usize,
    sample_rows: usize,
    sample_cols: usize,
    revision: u64,
    weights: Vec<f64>,
    full_grid: Option<FullSummary>,
    projection_checksum: String,
}

fn info(s: &Session) -> SessionInfo {
    let snap = s.snapshot();
    SessionInfo {
        v: 1,
        session: s.id.clone(),
        feature_sets: s.names.clone(),
        n: s.n,
        sample_size: s.sample_ids.len(),
        sample_rows: s.sample_spec.rows,
        sample_cols: s.sample_spec.cols,
        revision: snap.revision,
        weights: snap.weights.as_slice().to_vec(),
        full_grid: snap.full.as_ref().map(|f| full_summary(&snap, f, None)),
        projection_checksum: format!("{:016x}", s.projection_checksum()),
    }
}

async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<CreateSession>,
) -> ApiResult<(StatusCode, Json<SessionInfo>)> {
    check_version(req.v)?;
    let data = state.base_dir();
    let (manifest, base_dir) = match (req.manifest, req.manifest_path) {
        (Some(m), None) => (m, data),
        (None, Some(p)) => {
            let path = BundleManifest::resolve(&data, &p);
            let m = BundleManifest::read(&path)?;
            (m, path.parent().map(Path::to_path_buf).unwrap_or(data))
        }
        _ => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "give exactly one of manifest, manifest_path",
            ))
        }
    };
    let source = SessionSource {
        manifest,
        base_dir,
        assets: req.assets,
    };
    let id = uuid::Uuid::new_v4().to_string();
    let s = tokio::task::spawn_blocking(move || Session::open(id, source)).await??;
    let s = Arc::new(s);
    state.0.sessions.write().insert(s.id.clone(), s.clone());
    Ok((StatusCode::CREATED, Json(info(&s))))
}

fn lookup(state: &AppState, id: &str) -> ApiResult<Arc<Session>> {
    state.session(id).ok_or_else(|| ApiError::not_found(format!("no session {id}")))
}

async fn session_summary(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<SessionInfo>> {
    let s = lookup(&state, &id)?;
    Ok(Json(info(&s)))
}

async fn delete_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<StatusCode> {
    match state.0.sessions.write().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(format!("no session {id}"))),
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CellJson {
    pub id: String,
    pub row: usize,
    pub col: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asset: Option<String>,
}

#[derive(Serialize)]
struct GridJson {
    v: u32,
    session: String,
    revision: u64,
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    /// Row-major.
    cells: Vec<CellJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    server_ms: Option<f64>,
}

fn grid_cells(s: &Session, g: &GridAssignment) -> Vec<CellJson> {
    let mut cells: Vec<CellJson> = g
        .iter()
        .map(|(id, c)| CellJson {
            id: id.to_string(),
            row: c.row,
            col: c.col,
            asset: s.asset_for(id),
        })
        .collect();
    cells.sort_by_key(|c| (c.row, c.col));
    cells
}

fn grid_json(s: &Session, snap: &Snapshot, g: &GridAssignment, server_ms: Option<f64>) -> GridJson {
    GridJson {
        v: 1,
        session: s.id.clone(),
        revision: snap.revision,
        rows: g.spec().rows,
        cols: g.spec().cols,
        weights: snap.weights.as_slice().to_vec(),
        cells: grid_cells(s, g),
        server_ms,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsReq {
    #[serde(default)]
    v: Option<u32>,
    alphas: Vec<f64>,
}

async fn put_weights(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<WeightsReq>,
) -> ApiResult<Json<GridJson>> {
    check_version(req.v)?;
    let s = lookup(&state, &id)?;
    let start = Instant::now();
    let weights = WeightVector::normalized(req.alphas, WEIGHT_TOL)?;
    let _guard = s.writer.lock().await;
    let worker = s.clone();
    let snap = tokio::task::spawn_blocking(move || worker.set_weights(weights)).await??;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Json(grid_json(&s, &snap, &snap.sample_grid, Some(ms))))
}

async fn sample_grid(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<GridJson>> {
    let s = lookup(&state, &id)?;
    let snap = s.snapshot();
    Ok(Json(grid_json(&s, &snap, &snap.sample_grid, None)))
}

async fn feature_grid(
    State(state): State<AppState>,
    UrlPath((id, name)): UrlPath<(String, String)>,
) -> ApiResult<Json<serde_json::Value>> {
    let s = lookup(&state, &id)?;
    let i = s
        .names
        .iter()
        .position(|n| *n == name)
        .ok_or_else(|| ApiError::not_found(format!("no feature set {name:?}")))?;
    let g = s.feature_grid(i)?;
    Ok(Json(json!({
        "v": 1,
        "session": s.id,
        "feature_set": name,
        "rows": g.spec().rows,
        "cols": g.spec().cols,
        "cells": grid_cells(&s, &g),
    })))
}

#[derive(Serialize)]
struct FullSummary {
    v: u32,
    revision: u64,
    delta: f64,
    n: usize,
    rows: usize,
    cols: usize,
    empty: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    cached: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    server_ms: Option<f64>,
}

fn full_summary(snap: &Snapshot, f: &FullGrid, timing: Option<(bool, f64)>) -> FullSummary {
    FullSummary {
        v: 1,
        revision: snap.revision,
        delta: f.delta,
        n: f.grid.len(),
        rows: f.grid.spec().rows,
        cols: f.grid.spec().cols,
        empty: f.grid.empty_cells(),
        cached: timing.map(|t| t.0),
        server_ms: timing.map(|t| t.1),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FullReq {
    #[serde(default)]
    v: Option<u32>,
    #[serde(default = "default_delta")]
    delta: f64,
}

fn default_delta() -> f64 {
    1.0
}

async fn full_grid(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<FullReq>,
) -> ApiResult<Json<FullSummary>> {
    check_version(req.v)?;
    let s = lookup(&state, &id)?;
    let start = Instant::now();
    let _guard = s.writer.lock().await;
    let worker = s.clone();
    let (snap, cached) = tokio::task::spawn_blocking(move || worker.build_full(req.delta)).await??;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let f = snap.full.as_ref().expect("full grid just built");
    Ok(Json(full_summary(&snap, f, Some((cached, ms)))))
}

#[derive(Deserialize)]
struct MaskQuery {
    #[serde(rename = "R", default = "one")]
    r: usize,
    #[serde(rename = "S", default = "one")]
    s: usize,
}

fn one() -> usize {
    1
}

fn full_of(s: &Session) -> ApiResult<(Arc<Snapshot>, Arc<FullGrid>)> {
    let snap = s.snapshot();
    let f = snap.full.clone().ok_or_else(|| {
        ApiError::new(StatusCode::CONFLICT, "no full grid for this revision; POST full-grid first")
    })?;
    Ok((snap, f))
}

#[derive(Serialize)]
struct CompressedResp {
    v: u32,
    revision: u64,
    #[serde(flatten)]
    grid: CompressedGridJson,
}

async fn compressed(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<MaskQuery>,
) -> ApiResult<Json<CompressedResp>> {
    let s = lookup(&state, &id)?;
    let (snap, f) = full_of(&s)?;
    let c = f.compressed(q.r, q.s)?;
    Ok(Json(CompressedResp {
        v: 1,
        revision: snap.revision,
        grid: c.to_json(),
    }))
}

#[derive(Serialize)]
struct MembersResp {
    v: u32,
    revision: u64,
    #[serde(rename = "I")]
    i: usize,
    #[serde(rename = "J")]
    j: usize,
    rep: Option<String>,
    members: Vec<Member>,
}

async fn cell_members(
    State(state): State<AppState>,
    UrlPath((id, i, j)): UrlPath<(String, usize, usize)>,
    Query(q): Query<MaskQuery>,
) -> ApiResult<Json<MembersResp>> {
    let s = lookup(&state, &id)?;
    let (snap, f) = full_of(&s)?;
    let c = f.compressed(q.r, q.s)?;
    let cell = c
        .cell(i, j)
        .ok_or_else(|| ApiError::not_found(format!("coarse cell ({i}, {j}) outside {}x{}", c.rows, c.cols)))?;
    Ok(Json(MembersResp {
        v: 1,
        revision: snap.revision,
        i,
        j,
        rep: cell.rep.clone(),
        members: cell.members.clone(),
    }))
}

#[derive(Deserialize)]
struct ExpandQuery {
    #[serde(rename = "I")]
    i: usize,
    #[serde(rename = "J")]
    j: usize,
    #[serde(rename = "R", default = "one")]
    r: usize,
    #[serde(rename = "S", default = "one")]
    s: usize,
}

#[derive(Serialize)]
struct ExpandResp {
    v: u32,
    revision: u64,
    #[serde(rename = "R")]
    mask_rows: usize,
    #[serde(rename = "S")]
    mask_cols: usize,
    #[serde(flatten)]
    plan: ExpansionPlan,
}

async fn expand(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ExpandQuery>,
) -> ApiResult<Json<ExpandResp>> {
    let s = lookup(&state, &id)?;
    let (snap, f) = full_of(&s)?;
    let c = f.compressed(q.r, q.s)?;
    if c.cell(q.i, q.j).is_none() {
        return Err(ApiError::not_found(format!(
            "coarse cell ({}, {}) outside {}x{}",
            q.i, q.j, c.rows, c.cols
        )));
    }
    let plan = expand_context(&c, q.i, q.j)?;
    Ok(Json(ExpandResp {
        v: 1,
        revision: snap.revision,
        mask_rows: q.r,
        mask_cols: q.s,
        plan,
    }))
}
