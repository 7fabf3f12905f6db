//! Local-space position/normal map baking and per-texel reverse decal
//! projection into a model's texture.
//!
//! The pipeline has two stages. [`localmaps::generate_local_space_maps`]
//! rasterizes the mesh in UV space once, producing a position map and a
//! normal map the size of the target texture. [`projection::apply_stamp`]
//! then walks every texel of those maps, culls texels facing away from the
//! decal projector, maps the rest into the projector's box and copies the
//! decal color into the texture.

pub mod fixtures;
pub mod imageio;
pub mod localmaps;
pub mod mesh;
pub mod projection;
mod raster;

pub use imageio::{load_png, save_png, ImageError, Rgba8, Texture};
pub use localmaps::{
    decode_lsmap, dilate_maps, encode_lsmap, generate_local_space_maps, CacheOutcome, Coverage,
    LocalSpaceMaps, MapsCache, MapsError, TexelCoord,
};
pub use mesh::{parse_obj, validate_mesh, Mesh, MeshError, ValidationReport, Vertex};
pub use projection::{
    apply_stamp, blend_pixel, project_texel, sample_decal, BlendMode, DecalProjector, Filter,
    ProjectorError, StampError, StampOptions, StampStats,
};
