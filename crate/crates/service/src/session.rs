use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use decalpaint_core::{
    apply_stamp, DecalProjector, LocalSpaceMaps, Mesh, StampError, StampOptions, StampStats,
    Texture,
};
use tokio::sync::{broadcast, Mutex};

/// A `(version, texture)` pair that readers observe atomically.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub version: u64,
    pub texture: Arc<Texture>,
}

#[derive(Debug)]
struct PaintState {
    texture: Arc<Texture>,
    history: VecDeque<Arc<Texture>>,
    version: u64,
}

/// One painting session: a mesh, its maps, and the texture being painted.
///
/// Mutations queue on a fair mutex, so they apply in arrival order.
#[derive(Debug)]
pub struct Session {
    id: String,
    mesh: Mesh,
    mesh_obj: Vec<u8>,
    maps: Arc<LocalSpaceMaps>,
    history_depth: usize,
    decals: RwLock<HashMap<String, Arc<Texture>>>,
    writer: Arc<Mutex<PaintState>>,
    published: RwLock<Snapshot>,
    events: broadcast::Sender<u64>,
}

impl Session {
    pub fn new(
        id: String,
        mesh: Mesh,
        mesh_obj: Vec<u8>,
        maps: Arc<LocalSpaceMaps>,
        texture: Texture,
        history_depth: usize,
    ) -> Self {
        let texture = Arc::new(texture);
        let (events, _) = broadcast::channel(64);
        Self {
            id,
            mesh,
            mesh_obj,
            maps,
            history_depth,
            decals: RwLock::new(HashMap::new()),
            writer: Arc::new(Mutex::new(PaintState {
                texture: Arc::clone(&texture),
                history: VecDeque::new(),
                version: 0,
            })),
            published: RwLock::new(Snapshot {
                version: 0,
                texture,
            }),
            events,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_obj(&self) -> &[u8] {
        &self.mesh_obj
    }

    pub fn maps(&self) -> &Arc<LocalSpaceMaps> {
        &self.maps
    }

    pub fn snapshot(&self) -> Snapshot {
        self.published.read().unwrap().clone()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<u64> {
        self.events.subscribe()
    }

    pub fn add_decal(&self, id: String, decal: Texture) {
        self.decals
            .write()
            .unwrap()
            .entry(id)
            .or_insert_with(|| Arc::new(decal));
    }

    pub fn decal(&self, id: &str) -> Option<Arc<Texture>> {
        self.decals.read().unwrap().get(id).cloned()
    }

    fn publish(&self, state: &PaintState) {
        *self.published.write().unwrap() = Snapshot {
            version: state.version,
            texture: Arc::clone(&state.texture),
        };
        // No subscribers is fine.
        let _ = self.events.send(state.version);
    }

    /// Queues a stamp behind earlier mutations and applies it.
    pub async fn stamp(
        self: &Arc<Self>,
        projector: DecalProjector,
        options: StampOptions,
    ) -> Result<(u64, StampStats), StampError> {
        let mut state = Arc::clone(&self.writer).lock_owned().await;
        let session = Arc::clone(self);
        tokio::task::spawn_blocking(move || {
            let mut next = Texture::clone(&state.texture);
            let stats = apply_stamp(&mut next, &session.maps, &projector, &options)?;
            let prev = std::mem::replace(&mut state.texture, Arc::new(next));
            if state.history.len() == session.history_depth {
                state.history.pop_front();
            }
            if session.history_depth > 0 {
                state.history.push_back(prev);
            }
            state.version += 1;
            session.publish(&state);
            Ok((state.version, stats))
        })
        .await
        .expect("stamp task panicked")
    }

    /// Restores the most recent snapshot. Returns the version afterwards,
    /// unchanged if there was nothing to undo.
    pub async fn undo(&self) -> u64 {
        let mut state = self.writer.lock().await;
        if let Some(prev) = state.history.pop_back() {
            state.texture = prev;
            state.version += 1;
            self.publish(&state);
        }
        state.version
    }
}
