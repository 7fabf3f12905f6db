//! Canonical scenes used by tests, benchmarks and examples.

use glam::{Vec2, Vec3};

use crate::imageio::{Rgba8, Texture};
use crate::mesh::{Mesh, Vertex};

/// OBJ source of [`unit_quad`].
pub const UNIT_QUAD_OBJ: &str = "\
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
vn 0 0 1
f 1/1/1 2/2/1 3/3/1
f 1/1/1 3/3/1 4/4/1
";

/// The planar unit quad: positions `(u, v, 0)`, normals `+Z`, UVs spanning
/// `[0,1]^2`, split along the `(0,0)-(1,1)` diagonal.
pub fn unit_quad() -> Mesh {
    grid(1, 1, 2)
}

/// A `cols`×`rows` planar grid over the UV square with positions `(u, v, 0)`,
/// keeping only the first `keep` triangles.
pub fn grid(cols: u32, rows: u32, keep: usize) -> Mesh {
    let mut vertices = Vec::new();
    for j in 0..=rows {
        for i in 0..=cols {
            let uv = Vec2::new(i as f32 / cols as f32, j as f32 / rows as f32);
            vertices.push(Vertex {
                position: uv.extend(0.0),
                normal: Vec3::Z,
                uv,
            });
        }
    }
    let id = |i: u32, j: u32| j * (cols + 1) + i;
    let mut triangles = Vec::new();
    for j in 0..rows {
        for i in 0..cols {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    triangles.truncate(keep);
    Mesh::new(vertices, triangles).expect("grid is well formed")
}

/// A two-color checkerboard with square cells of `cell` pixels.
pub fn checkerboard(width: u32, height: u32, cell: u32, a: Rgba8, b: Rgba8) -> Texture {
    let cell = cell.max(1);
    Texture::from_fn(width, height, |x, y| {
        if (x / cell + y / cell).is_multiple_of(2) {
            a
        } else {
            b
        }
    })
    .expect("non-zero checkerboard")
}

/// An opaque image where every pixel has a distinct color (for sizes up to 4096²).
pub fn gradient(width: u32, height: u32) -> Texture {
    Texture::from_fn(width, height, |x, y| {
        [
            (x & 0xff) as u8,
            (y & 0xff) as u8,
            (((x >> 8) & 0xf) | (((y >> 8) & 0xf) << 4)) as u8,
            255,
        ]
    })
    .expect("non-zero gradient")
}
