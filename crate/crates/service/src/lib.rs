//! Painting sessions over HTTP and WebSocket.
//!
//! Each session owns a mesh, its dilated local-space maps and one target
//! texture. Stamps and undos on a session are applied one at a time in
//! arrival order; every applied mutation bumps the session version and is
//! announced on `/sessions/{id}/events` as
//! `{"type":"texture-updated","version":N}`.

mod error;
mod request;
mod session;

pub use error::ApiError;
pub use request::{RequestError, StampRequest};
pub use session::{Session, Snapshot};

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, HeaderName};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use decalpaint_core::{
    dilate_maps, encode_lsmap, load_png, parse_obj, save_png, validate_mesh, MapsCache, MapsError,
    StampStats, Texture,
};
use futures::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;
use tokio::sync::broadcast;

pub const VERSION_HEADER: HeaderName = HeaderName::from_static("x-texture-version");

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub dilate_radius: u32,
    pub history_depth: usize,
    pub max_map_size: u32,
    pub max_body_bytes: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            dilate_radius: 2,
            history_depth: 32,
            max_map_size: 8192,
            max_body_bytes: 512 << 20,
            cache_dir: None,
        }
    }
}

#[derive(Debug)]
struct Inner {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    cache: Mutex<MapsCache>,
}

/// Shared service state. Cheap to clone.
#[derive(Debug, Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        let cache = match &config.cache_dir {
            Some(dir) => MapsCache::with_dir(dir),
            None => MapsCache::new(),
        };
        Self(Arc::new(Inner {
            config,
            sessions: RwLock::new(HashMap::new()),
            cache: Mutex::new(cache),
        }))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.0.config
    }

    /// Number of times the shared maps cache had to rasterize.
    pub fn map_generations(&self) -> u64 {
        self.0.cache.lock().unwrap().generations()
    }

    pub fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.0
            .sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }
}

pub fn router(state: AppState) -> Router {
    let limit = state.config().max_body_bytes;
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/decals", post(upload_decal))
        .route("/sessions/{id}/stamps", post(post_stamp))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/texture", get(get_texture))
        .route("/sessions/{id}/maps", get(get_maps))
        .route("/sessions/{id}/mesh", get(get_mesh))
        .route("/sessions/{id}/events", get(events))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

/// Serves the API on an already-bound listener until the process exits.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SessionSummary {
    pub id: String,
    pub version: u64,
    pub triangle_count: usize,
    pub map_size: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DecalSummary {
    pub decal_id: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StampResponse {
    pub version: u64,
    pub stats: StampStats,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct VersionResponse {
    pub version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Event {
    TextureUpdated { version: u64 },
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> T + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(ApiError::internal)
}

async fn create_session(
    State(state): State<AppState>,
    mut form: Multipart,
) -> Result<Json<SessionSummary>, ApiError> {
    let (mut mesh, mut texture, mut map_size) = (None, None, None);
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request("InvalidMultipart", e))?
    {
        let name = field.name().unwrap_or_default().to_owned();
        let data = field
            .bytes()
            .await
            .map_err(|e| ApiError::bad_request("InvalidMultipart", e))?;
        match name.as_str() {
            "mesh" => mesh = Some(data),
            "texture" => texture = Some(data),
            "map_size" => map_size = Some(data),
            _ => {}
        }
    }
    let missing = |f: &str| {
        ApiError::bad_request("MissingField", format!("multipart field {f:?} is required"))
    };
    let mesh = mesh.ok_or_else(|| missing("mesh"))?;
    let texture = texture.ok_or_else(|| missing("texture"))?;
    let map_size = map_size.ok_or_else(|| missing("map_size"))?;
    let map_size: u32 = std::str::from_utf8(&map_size)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| {
            ApiError::bad_request("InvalidMapSize", "map_size must be a positive integer")
        })?;
    let max = state.config().max_map_size;
    if map_size == 0 || map_size > max {
        return Err(ApiError::bad_request(
            "InvalidMapSize",
            format!("map_size must be in 1..={max}, got {map_size}"),
        ));
    }

    let st = state.clone();
    let session = blocking(move || build_session(&st, mesh, texture, map_size)).await??;
    let summary = SessionSummary {
        id: session.id().to_owned(),
        version: 0,
        triangle_count: session.mesh().triangle_count(),
        map_size,
    };
    state
        .0
        .sessions
        .write()
        .unwrap()
        .insert(summary.id.clone(), session);
    Ok(Json(summary))
}

fn build_session(
    state: &AppState,
    mesh_obj: Bytes,
    texture_png: Bytes,
    map_size: u32,
) -> Result<Arc<Session>, ApiError> {
    let mesh = parse_obj(&mesh_obj).map_err(|e| ApiError::bad_request("InvalidMesh", e))?;
    let texture = load_png(&texture_png).map_err(|e| ApiError::bad_request("InvalidTexture", e))?;
    if texture.dimensions() != (map_size, map_size) {
        return Err(ApiError::bad_request(
            "DimensionMismatch",
            format!(
                "texture is {}x{} but map_size is {map_size}; they must match",
                texture.width(),
                texture.height()
            ),
        ));
    }
    let generated = state
        .0
        .cache
        .lock()
        .unwrap()
        .get_or_generate(&mesh, map_size, map_size);
    let maps = match generated {
        Ok((maps, _)) => maps,
        Err(MapsError::BudgetExceeded { .. } | MapsError::OverlapDetected { .. }) => {
            return Err(ApiError::validation(validate_mesh(
                &mesh, map_size, map_size,
            )));
        }
        Err(e) => return Err(ApiError::internal(e)),
    };
    let radius = state.config().dilate_radius;
    let maps = if radius > 0 {
        Arc::new(dilate_maps(&maps, radius))
    } else {
        maps
    };
    Ok(Arc::new(Session::new(
        uuid::Uuid::new_v4().simple().to_string(),
        mesh,
        mesh_obj.to_vec(),
        maps,
        texture,
        state.config().history_depth,
    )))
}

/// Decal ids are derived from the decoded pixels, so re-uploading the same
/// image yields the same id.
pub fn decal_id(decal: &Texture) -> String {
    let mut h = Sha256::new();
    h.update(decal.width().to_le_bytes());
    h.update(decal.height().to_le_bytes());
    h.update(decal.as_bytes());
    let digest = h.finalize();
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    format!("d{hex}")
}

async fn upload_decal(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<DecalSummary>, ApiError> {
    let session = state.session(&id)?;
    let decal = blocking(move || load_png(&body))
        .await?
        .map_err(|e| ApiError::bad_request("InvalidDecal", e))?;
    let summary = DecalSummary {
        decal_id: decal_id(&decal),
        width: decal.width(),
        height: decal.height(),
    };
    session.add_decal(summary.decal_id.clone(), decal);
    Ok(Json(summary))
}

async fn post_stamp(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<StampResponse>, ApiError> {
    let session = state.session(&id)?;
    let req: StampRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("InvalidRequest", e))?;
    let decal = session
        .decal(&req.decal_id)
        .ok_or_else(|| ApiError::not_found("decal", &req.decal_id))?;
    let projector = req
        .projector(decal)
        .map_err(|e| ApiError::bad_request("InvalidProjector", e))?;
    req.options
        .validate()
        .map_err(|e| ApiError::bad_request("InvalidOptions", e))?;
    let (version, stats) = session
        .stamp(projector, req.options)
        .await
        .map_err(|e| ApiError::bad_request("StampFailed", e))?;
    Ok(Json(StampResponse { version, stats }))
}

async fn undo(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<VersionResponse>, ApiError> {
    let session = state.session(&id)?;
    Ok(Json(VersionResponse {
        version: session.undo().await,
    }))
}

async fn get_texture(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let snap = state.session(&id)?.snapshot();
    let texture = Arc::clone(&snap.texture);
    let png = blocking(move || save_png(&texture)).await?;
    Ok((
        [
            (header::CONTENT_TYPE, "image/png".to_owned()),
            (VERSION_HEADER, snap.version.to_string()),
        ],
        png,
    )
        .into_response())
}

async fn get_maps(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let maps = Arc::clone(state.session(&id)?.maps());
    let bytes = blocking(move || encode_lsmap(&maps))
        .await?
        .map_err(ApiError::internal)?;
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], bytes).into_response())
}

async fn get_mesh(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    Ok((
        [(header::CONTENT_TYPE, "text/plain")],
        session.mesh_obj().to_vec(),
    )
        .into_response())
}

async fn events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    // Subscribe before the handshake completes so no event after it is lost.
    let rx = session.subscribe();
    Ok(ws.on_upgrade(move |socket| forward_events(socket, rx)))
}

async fn forward_events(socket: WebSocket, mut rx: broadcast::Receiver<u64>) {
    let (mut tx, mut incoming) = socket.split();
    loop {
        tokio::select! {
            ev = rx.recv() => {
                let version = match ev {
                    Ok(v) => v,
                    Err(broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(broadcast::error::RecvError::Closed) => break,
                };
                let text = serde_json::to_string(&Event::TextureUpdated { version }).unwrap();
                if tx.send(Message::Text(text.into())).await.is_err() {
                    break;
                }
            }
            msg = incoming.next() => match msg {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
}
