use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::codec::{decode_lsmap, encode_lsmap};
use super::{generate_local_space_maps, LocalSpaceMaps, MapsError};
use crate::mesh::Mesh;

/// How a [`MapsCache`] lookup was satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    MemoryHit,
    DiskHit,
    Generated,
}

impl CacheOutcome {
    pub fn is_hit(self) -> bool {
        self != CacheOutcome::Generated
    }
}

type Key = (u64, u32, u32);

/// Generated maps keyed by mesh content fingerprint and dimensions, so an
/// unchanged mesh is never rasterized twice. Optionally persisted as LSM1
/// files in a directory so hits survive process restarts.
///
/// Single writer: callers needing shared access wrap it in a lock.
#[derive(Debug, Default)]
pub struct MapsCache {
    entries: HashMap<Key, Arc<LocalSpaceMaps>>,
    dir: Option<PathBuf>,
    generations: u64,
}

impl MapsCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// A cache backed by LSM1 files under `dir` (created on first store).
    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
            ..Self::default()
        }
    }

    /// Number of rasterizations this cache has performed.
    pub fn generations(&self) -> u64 {
        self.generations
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn file_for(dir: &Path, (fp, w, h): Key) -> PathBuf {
        dir.join(format!("{fp:016x}_{w}x{h}.lsm1"))
    }

    fn load_from_disk(&self, key: Key) -> Option<LocalSpaceMaps> {
        let path = Self::file_for(self.dir.as_deref()?, key);
        let bytes = fs::read(path).ok()?;
        // A stale or corrupt file is treated as a miss and overwritten.
        let maps = decode_lsmap(&bytes).ok()?;
        (maps.mesh_fingerprint() == key.0
            && maps.dimensions() == (key.1, key.2)
            && !maps.has_dilation())
        .then_some(maps)
    }

    fn store_to_disk(&self, key: Key, maps: &LocalSpaceMaps) -> Result<(), MapsError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let bytes = encode_lsmap(maps).map_err(|e| MapsError::CacheIo(e.to_string()))?;
        fs::create_dir_all(dir).map_err(|e| MapsError::CacheIo(e.to_string()))?;
        fs::write(Self::file_for(dir, key), bytes).map_err(|e| MapsError::CacheIo(e.to_string()))
    }

    /// Returns cached maps for `mesh` at `width`×`height`, rasterizing only on
    /// a miss.
    pub fn get_or_generate(
        &mut self,
        mesh: &Mesh,
        width: u32,
        height: u32,
    ) -> Result<(Arc<LocalSpaceMaps>, CacheOutcome), MapsError> {
        let key = (mesh.fingerprint(), width, height);
        if let Some(maps) = self.entries.get(&key) {
            return Ok((Arc::clone(maps), CacheOutcome::MemoryHit));
        }
        if let Some(maps) = self.load_from_disk(key) {
            let maps = Arc::new(maps);
            self.entries.insert(key, Arc::clone(&maps));
            return Ok((maps, CacheOutcome::DiskHit));
        }
        let maps = generate_local_space_maps(mesh, width, height)?;
        self.generations += 1;
        self.store_to_disk(key, &maps)?;
        let maps = Arc::new(maps);
        self.entries.insert(key, Arc::clone(&maps));
        Ok((maps, CacheOutcome::Generated))
    }
}
