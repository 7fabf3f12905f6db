//! Local-space position and normal maps baked from a mesh's UV layout.
//!
//! Each covered texel stores the local-space position and unit normal of the
//! surface point that owns it, obtained by barycentric interpolation over the
//! owning UV triangle at the texel center. Rows run top to bottom: `v = 0`
//! lands on row `H - 1`.

mod cache;
mod codec;

use glam::Vec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imageio::Texture;
use crate::mesh::Mesh;
use crate::raster::{scan_triangle, ScanCounters};

pub use cache::{CacheOutcome, MapsCache};
pub use codec::{decode_lsmap, encode_lsmap, Lsm1Error, LSM1_MAGIC, MAX_DIMENSION};

/// Integer texel address; row 0 is the top image row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TexelCoord {
    pub x: u32,
    pub y: u32,
}

impl TexelCoord {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

/// Per-texel ownership state. The discriminants are the LSM1 on-disk values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum Coverage {
    #[default]
    Uncovered = 0,
    Covered = 1,
    /// Filled in by seam dilation from a neighboring covered texel.
    Dilated = 2,
}

impl Coverage {
    /// True for texels that carry surface data (covered or dilated).
    pub fn has_surface(self) -> bool {
        self != Coverage::Uncovered
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MapsError {
    #[error("map dimensions must be non-zero, got {width}x{height}")]
    ZeroSize { width: u32, height: u32 },
    #[error("triangle budget exceeded: {triangles} triangles > {capacity} texels")]
    BudgetExceeded { triangles: usize, capacity: u64 },
    #[error("UV triangles overlap at texel ({},{})", texel.x, texel.y)]
    OverlapDetected { texel: TexelCoord },
    #[error("maps cache I/O failed: {0}")]
    CacheIo(String),
}

/// Baked local-space data for one mesh at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSpaceMaps {
    width: u32,
    height: u32,
    positions: Vec<Vec3>,
    normals: Vec<Vec3>,
    coverage: Vec<Coverage>,
    has_dilation: bool,
    mesh_fingerprint: u64,
}

impl LocalSpaceMaps {
    /// All-uncovered maps.
    pub fn empty(width: u32, height: u32, mesh_fingerprint: u64) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            positions: vec![Vec3::ZERO; n],
            normals: vec![Vec3::ZERO; n],
            coverage: vec![Coverage::Uncovered; n],
            has_dilation: false,
            mesh_fingerprint,
        }
    }

    pub(crate) fn from_parts(
        width: u32,
        height: u32,
        positions: Vec<Vec3>,
        normals: Vec<Vec3>,
        coverage: Vec<Coverage>,
        has_dilation: bool,
        mesh_fingerprint: u64,
    ) -> Self {
        let n = width as usize * height as usize;
        assert!(positions.len() == n && normals.len() == n && coverage.len() == n);
        Self {
            width,
            height,
            positions,
            normals,
            coverage,
            has_dilation,
            mesh_fingerprint,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn texel_count(&self) -> usize {
        self.coverage.len()
    }

    pub fn mesh_fingerprint(&self) -> u64 {
        self.mesh_fingerprint
    }

    /// Whether a dilation pass has been applied (LSM1 flag bit 0).
    pub fn has_dilation(&self) -> bool {
        self.has_dilation
    }

    #[inline]
    pub fn index(&self, t: TexelCoord) -> usize {
        debug_assert!(t.x < self.width && t.y < self.height);
        t.y as usize * self.width as usize + t.x as usize
    }

    #[inline]
    pub fn position(&self, t: TexelCoord) -> Vec3 {
        self.positions[self.index(t)]
    }

    #[inline]
    pub fn normal(&self, t: TexelCoord) -> Vec3 {
        self.normals[self.index(t)]
    }

    #[inline]
    pub fn coverage(&self, t: TexelCoord) -> Coverage {
        self.coverage[self.index(t)]
    }

    /// Row-major position map.
    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Row-major normal map.
    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    /// Row-major coverage mask.
    pub fn coverage_mask(&self) -> &[Coverage] {
        &self.coverage
    }

    pub fn count(&self, state: Coverage) -> usize {
        self.coverage.iter().filter(|&&c| c == state).count()
    }

    /// Returns a copy where the texels in `drop` become uncovered with zeroed
    /// attributes.
    pub fn with_uncovered(&self, drop: impl IntoIterator<Item = TexelCoord>) -> Self {
        let mut out = self.clone();
        for t in drop {
            let i = out.index(t);
            out.positions[i] = Vec3::ZERO;
            out.normals[i] = Vec3::ZERO;
            out.coverage[i] = Coverage::Uncovered;
        }
        out
    }

    /// Applies `f` to every surface texel's position and normal. Used to build
    /// synthetic maps, e.g. rigidly moved copies.
    pub fn map_surface(&self, mut f: impl FnMut(Vec3, Vec3) -> (Vec3, Vec3)) -> Self {
        let mut out = self.clone();
        for i in 0..out.coverage.len() {
            if out.coverage[i].has_surface() {
                let (p, n) = f(out.positions[i], out.normals[i]);
                out.positions[i] = p;
                out.normals[i] = n;
            }
        }
        out
    }
}

/// Work performed by one generation pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerationCounters {
    pub triangles: usize,
    /// Texel centers tested against some triangle's edges.
    pub texels_tested: u64,
    /// Texels whose position/normal were written.
    pub texel_writes: u64,
    /// Largest number of writes received by any one texel.
    pub max_writes_per_texel: u32,
}

/// Rasterizes `mesh` in UV space into `width`×`height` position and normal
/// maps.
pub fn generate_local_space_maps(
    mesh: &Mesh,
    width: u32,
    height: u32,
) -> Result<LocalSpaceMaps, MapsError> {
    generate_local_space_maps_counted(mesh, width, height).map(|(m, _)| m)
}

/// [`generate_local_space_maps`] plus instrumentation counters.
pub fn generate_local_space_maps_counted(
    mesh: &Mesh,
    width: u32,
    height: u32,
) -> Result<(LocalSpaceMaps, GenerationCounters), MapsError> {
    if width == 0 || height == 0 {
        return Err(MapsError::ZeroSize { width, height });
    }
    let capacity = width as u64 * height as u64;
    if mesh.triangle_count() as u64 > capacity {
        return Err(MapsError::BudgetExceeded {
            triangles: mesh.triangle_count(),
            capacity,
        });
    }

    let mut maps = LocalSpaceMaps::empty(width, height, mesh.fingerprint());
    // Owning triangle per texel; u32::MAX is unclaimed.
    let mut owner = vec![u32::MAX; maps.texel_count()];
    let mut writes = vec![0u32; maps.texel_count()];
    let mut first_conflict: Option<usize> = None;
    let mut scan = ScanCounters::default();
    let mut texel_writes = 0u64;

    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(t);
        scan_triangle([a.uv, b.uv, c.uv], width, height, &mut scan, |x, y, w| {
            let i = y as usize * width as usize + x as usize;
            if owner[i] != u32::MAX {
                first_conflict = Some(first_conflict.map_or(i, |f| f.min(i)));
                return;
            }
            owner[i] = t as u32;
            let normal = (a.normal * w[0] + b.normal * w[1] + c.normal * w[2]).normalize_or_zero();
            if normal == Vec3::ZERO {
                return;
            }
            maps.positions[i] = a.position * w[0] + b.position * w[1] + c.position * w[2];
            maps.normals[i] = normal;
            maps.coverage[i] = Coverage::Covered;
            writes[i] += 1;
            texel_writes += 1;
        });
    }

    if let Some(i) = first_conflict {
        return Err(MapsError::OverlapDetected {
            texel: TexelCoord::new(i as u32 % width, i as u32 / width),
        });
    }
    let counters = GenerationCounters {
        triangles: mesh.triangle_count(),
        texels_tested: scan.tested,
        texel_writes,
        max_writes_per_texel: writes.iter().copied().max().unwrap_or(0),
    };
    Ok((maps, counters))
}

/// Pads UV island borders: every uncovered texel within Chebyshev distance
/// `radius` of a covered texel copies the attributes of the nearest covered
/// texel (ties broken by smallest y, then smallest x) and is marked
/// [`Coverage::Dilated`]. Only originally covered texels act as sources.
pub fn dilate_maps(maps: &LocalSpaceMaps, radius: u32) -> LocalSpaceMaps {
    if radius == 0 {
        return maps.clone();
    }
    let mut out = maps.clone();
    out.has_dilation = true;
    let (w, h) = (maps.width as i64, maps.height as i64);
    let r = radius as i64;
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if maps.coverage[i] != Coverage::Uncovered {
                continue;
            }
            let mut best: Option<(i64, usize)> = None;
            for sy in (y - r).max(0)..=(y + r).min(h - 1) {
                for sx in (x - r).max(0)..=(x + r).min(w - 1) {
                    let j = (sy * w + sx) as usize;
                    if maps.coverage[j] != Coverage::Covered {
                        continue;
                    }
                    let d = (sx - x).abs().max((sy - y).abs());
                    // Row-major scan order breaks distance ties by (y, x).
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, j));
                    }
                }
            }
            if let Some((_, j)) = best {
                out.positions[i] = maps.positions[j];
                out.normals[i] = maps.normals[j];
                out.coverage[i] = Coverage::Dilated;
            }
        }
    }
    out
}

/// Which map to visualize with [`debug_texture`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Position,
    Normal,
}

/// Renders a map as an image, remapping each component linearly from
/// `[min, max]` to `[0, 255]` (clamped). Texels without surface data are
/// transparent black.
pub fn debug_texture(maps: &LocalSpaceMaps, kind: MapKind, min: f32, max: f32) -> Texture {
    let data = match kind {
        MapKind::Position => &maps.positions,
        MapKind::Normal => &maps.normals,
    };
    let span = if max > min { max - min } else { 1.0 };
    let to_byte = |c: f32| ((c - min) / span * 255.0).round().clamp(0.0, 255.0) as u8;
    Texture::from_fn(maps.width, maps.height, |x, y| {
        let i = y as usize * maps.width as usize + x as usize;
        if !maps.coverage[i].has_surface() {
            return [0, 0, 0, 0];
        }
        let v = data[i];
        [to_byte(v.x), to_byte(v.y), to_byte(v.z), 255]
    })
    .expect("maps have non-zero size")
}
