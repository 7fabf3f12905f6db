//! Per-texel reverse projection of a decal into a texture.
//!
//! A [`DecalProjector`] is an oriented box in the mesh's local space looking
//! down its own −Z axis. Every texel of the local-space maps is tested on its
//! own: texels whose normal does not face the projector are culled, the rest
//! are moved into the projector's unit box, and texels inside the box take
//! their color from the decal image. Projection math runs in f64.

use std::sync::Arc;

use glam::{DMat3, DQuat, DVec2, DVec3, Quat, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imageio::{Rgba8, Texture};
use crate::localmaps::{Coverage, LocalSpaceMaps};

#[derive(Debug, Error, PartialEq)]
pub enum ProjectorError {
    #[error("projector scale must be positive in every axis, got {0:?}")]
    NonPositiveScale([f32; 3]),
    #[error("projector orientation quaternion has zero length")]
    DegenerateOrientation,
    #[error("projector transform contains non-finite values")]
    NonFinite,
}

#[derive(Debug, Error, PartialEq)]
pub enum StampError {
    #[error("texture is {texture:?} but local-space maps are {maps:?}; they must match")]
    DimensionMismatch {
        texture: (u32, u32),
        maps: (u32, u32),
    },
    #[error("invalid stamp options: {0}")]
    InvalidOptions(String),
}

/// Orthographic decal box: center, orientation and half-extents in the mesh's
/// local space. `scale.x`/`scale.y` are the half-width and half-height of the
/// decal plane, `scale.z` the half-depth of the projection range.
#[derive(Debug, Clone)]
pub struct DecalProjector {
    position: Vec3,
    orientation: Quat,
    scale: Vec3,
    decal: Arc<Texture>,
    center: DVec3,
    to_local: DMat3,
    half_extents: DVec3,
    forward: DVec3,
}

impl DecalProjector {
    pub fn new(
        position: Vec3,
        orientation: Quat,
        scale: Vec3,
        decal: Arc<Texture>,
    ) -> Result<Self, ProjectorError> {
        if !position.is_finite() || !orientation.is_finite() || !scale.is_finite() {
            return Err(ProjectorError::NonFinite);
        }
        if scale.cmple(Vec3::ZERO).any() {
            return Err(ProjectorError::NonPositiveScale(scale.to_array()));
        }
        let q = DQuat::from_xyzw(
            orientation.x as f64,
            orientation.y as f64,
            orientation.z as f64,
            orientation.w as f64,
        );
        let len = q.length();
        if len == 0.0 {
            return Err(ProjectorError::DegenerateOrientation);
        }
        let q = q / len;
        let rotation = DMat3::from_quat(q);
        Ok(Self {
            position,
            orientation: q.as_quat(),
            scale,
            decal,
            center: position.as_dvec3(),
            to_local: rotation.transpose(),
            half_extents: scale.as_dvec3(),
            forward: -rotation.z_axis,
        })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    /// Unit-length orientation.
    pub fn orientation(&self) -> Quat {
        self.orientation
    }

    pub fn scale(&self) -> Vec3 {
        self.scale
    }

    pub fn decal(&self) -> &Texture {
        &self.decal
    }

    pub fn decal_arc(&self) -> &Arc<Texture> {
        &self.decal
    }

    /// Viewing direction (projector-frame −Z) in mesh local space.
    pub fn forward(&self) -> DVec3 {
        self.forward
    }

    /// Maps a local-space point into the projector's unit box.
    #[inline]
    pub fn to_box(&self, p: DVec3) -> DVec3 {
        (self.to_local * (p - self.center)) / self.half_extents
    }
}

/// Where a texel lands on the decal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TexelProjection {
    /// Decal image coordinates in `[0,1]^2`, `v = 0` at the image top.
    pub uv: DVec2,
    /// Signed offset from the box center along the viewing direction,
    /// in units of the half-depth, in `[-1, 1]`. Positive values lie beyond
    /// the center as seen from the projector.
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TexelOutcome {
    Culled,
    OutOfBounds,
    Hit(TexelProjection),
}

/// Classifies one surface sample against the projector.
///
/// A sample is culled when `dot(normal, forward) >= cull_cosine`.
#[inline]
pub fn classify_texel(
    position: Vec3,
    normal: Vec3,
    projector: &DecalProjector,
    cull_cosine: f32,
) -> TexelOutcome {
    if normal.as_dvec3().dot(projector.forward) >= cull_cosine as f64 {
        return TexelOutcome::Culled;
    }
    let p = projector.to_box(position.as_dvec3());
    if p.x.abs() > 1.0 || p.y.abs() > 1.0 || p.z.abs() > 1.0 {
        return TexelOutcome::OutOfBounds;
    }
    TexelOutcome::Hit(TexelProjection {
        uv: DVec2::new((p.x + 1.0) * 0.5, (1.0 - p.y) * 0.5),
        depth: -p.z,
    })
}

/// [`classify_texel`] collapsed to the hit case.
pub fn project_texel(
    position: Vec3,
    normal: Vec3,
    projector: &DecalProjector,
    cull_cosine: f32,
) -> Option<TexelProjection> {
    match classify_texel(position, normal, projector, cull_cosine) {
        TexelOutcome::Hit(p) => Some(p),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlendMode {
    /// Overwrite with the decal color.
    #[default]
    Copy,
    /// Non-premultiplied source-over.
    AlphaOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    #[default]
    Nearest,
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StampOptions {
    pub blend_mode: BlendMode,
    pub filter: Filter,
    pub cull_cosine: f32,
    /// Copy mode only writes decal texels with alpha above `threshold * 255`.
    pub alpha_threshold: f32,
}

impl Default for StampOptions {
    fn default() -> Self {
        Self {
            blend_mode: BlendMode::Copy,
            filter: Filter::Nearest,
            cull_cosine: 0.0,
            alpha_threshold: 0.0,
        }
    }
}

impl StampOptions {
    pub fn validate(&self) -> Result<(), StampError> {
        if !(-1.0..=1.0).contains(&self.cull_cosine) {
            return Err(StampError::InvalidOptions(format!(
                "cull_cosine {} outside [-1, 1]",
                self.cull_cosine
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha_threshold) {
            return Err(StampError::InvalidOptions(format!(
                "alpha_threshold {} outside [0, 1]",
                self.alpha_threshold
            )));
        }
        Ok(())
    }
}

/// Per-stamp texel accounting. The five outcome counters sum to W×H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StampStats {
    pub painted: u64,
    pub culled_backface: u64,
    pub out_of_bounds: u64,
    pub uncovered: u64,
    pub transparent_skipped: u64,
    /// Texels visited by the stamp loop.
    pub texel_visits: u64,
}

impl StampStats {
    pub fn total(&self) -> u64 {
        self.painted
            + self.culled_backface
            + self.out_of_bounds
            + self.uncovered
            + self.transparent_skipped
    }
}

/// Samples the decal in plain image space (`v = 0` is the top row).
pub fn sample_decal(image: &Texture, uv: DVec2, filter: Filter) -> Rgba8 {
    let (w, h) = image.dimensions();
    match filter {
        Filter::Nearest => {
            let x = ((uv.x * w as f64).floor() as i64).clamp(0, w as i64 - 1);
            let y = ((uv.y * h as f64).floor() as i64).clamp(0, h as i64 - 1);
            image.get(x as u32, y as u32)
        }
        Filter::Bilinear => {
            let fx = uv.x as f32 * w as f32 - 0.5;
            let fy = uv.y as f32 * h as f32 - 0.5;
            let x0 = fx.floor();
            let y0 = fy.floor();
            let tx = fx - x0;
            let ty = fy - y0;
            let cx = |x: f32| (x as i64).clamp(0, w as i64 - 1) as u32;
            let cy = |y: f32| (y as i64).clamp(0, h as i64 - 1) as u32;
            let (xa, xb, ya, yb) = (cx(x0), cx(x0 + 1.0), cy(y0), cy(y0 + 1.0));
            let (p00, p10, p01, p11) = (
                image.get(xa, ya),
                image.get(xb, ya),
                image.get(xa, yb),
                image.get(xb, yb),
            );
            std::array::from_fn(|c| {
                let top = p00[c] as f32 * (1.0 - tx) + p10[c] as f32 * tx;
                let bottom = p01[c] as f32 * (1.0 - tx) + p11[c] as f32 * tx;
                (top * (1.0 - ty) + bottom * ty).round().clamp(0.0, 255.0) as u8
            })
        }
    }
}

/// Whether `src` leaves the destination untouched under `mode`.
#[inline]
fn is_transparent(src: Rgba8, mode: BlendMode, alpha_threshold: f32) -> bool {
    match mode {
        BlendMode::Copy => src[3] as f32 <= alpha_threshold * 255.0,
        BlendMode::AlphaOver => src[3] == 0,
    }
}

pub fn blend_pixel(dst: Rgba8, src: Rgba8, mode: BlendMode, alpha_threshold: f32) -> Rgba8 {
    if is_transparent(src, mode, alpha_threshold) {
        return dst;
    }
    match mode {
        BlendMode::Copy => src,
        BlendMode::AlphaOver => {
            let sa = src[3] as f32 / 255.0;
            let da = dst[3] as f32 / 255.0;
            let out_a = sa + da * (1.0 - sa);
            if out_a <= 0.0 {
                return [0, 0, 0, 0];
            }
            let mut out = [0u8; 4];
            for c in 0..3 {
                let v = (src[c] as f32 * sa + dst[c] as f32 * da * (1.0 - sa)) / out_a;
                out[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            out[3] = (out_a * 255.0).round().clamp(0.0, 255.0) as u8;
            out
        }
    }
}

/// Paints the decal into `texture` by visiting every texel of `maps` once.
/// Texels that are uncovered, culled or outside the projector box are left
/// untouched.
pub fn apply_stamp(
    texture: &mut Texture,
    maps: &LocalSpaceMaps,
    projector: &DecalProjector,
    options: &StampOptions,
) -> Result<StampStats, StampError> {
    if texture.dimensions() != maps.dimensions() {
        return Err(StampError::DimensionMismatch {
            texture: texture.dimensions(),
            maps: maps.dimensions(),
        });
    }
    options.validate()?;

    let mut stats = StampStats::default();
    let width = maps.width() as usize;
    let coverage = maps.coverage_mask();
    let positions = maps.positions();
    let normals = maps.normals();
    for i in 0..maps.texel_count() {
        stats.texel_visits += 1;
        if coverage[i] == Coverage::Uncovered {
            stats.uncovered += 1;
            continue;
        }
        match classify_texel(positions[i], normals[i], projector, options.cull_cosine) {
            TexelOutcome::Culled => stats.culled_backface += 1,
            TexelOutcome::OutOfBounds => stats.out_of_bounds += 1,
            TexelOutcome::Hit(hit) => {
                let src = sample_decal(projector.decal(), hit.uv, options.filter);
                if is_transparent(src, options.blend_mode, options.alpha_threshold) {
                    stats.transparent_skipped += 1;
                    continue;
                }
                let (x, y) = ((i % width) as u32, (i / width) as u32);
                let dst = texture.get(x, y);
                texture.set(
                    x,
                    y,
                    blend_pixel(dst, src, options.blend_mode, options.alpha_threshold),
                );
                stats.painted += 1;
            }
        }
    }
    Ok(stats)
}
