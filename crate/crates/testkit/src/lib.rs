//! Test support: random scene generation and brute-force reference
//! implementations.
//!
//! The oracles here deliberately avoid the engine's code paths. Map coverage
//! is recomputed with f64 barycentric coordinates directly in UV space, and
//! stamping uses an explicit ray/plane intersection built from hand-rolled
//! quaternion rotation instead of the engine's inverse box transform.

use std::sync::Arc;

use decalpaint_core::{
    BlendMode, DecalProjector, Filter, LocalSpaceMaps, Mesh, StampOptions, TexelCoord, Texture,
    Vertex,
};
use glam::{Quat, Vec2, Vec3};
use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let l = v.length();
        if l > 0.1 && l <= 1.0 {
            return v / l;
        }
    }
}

pub fn random_rotation(rng: &mut impl Rng) -> Quat {
    loop {
        let q = Quat::from_xyzw(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let l = q.length();
        if l > 0.1 && l <= 1.0 {
            return q / l;
        }
    }
}

/// A random UV layout of at most `max_triangles` pairwise interior-disjoint
/// triangles: a jittered grid whose cells are split along a random diagonal,
/// with a random subset of triangles kept. Positions follow a bumpy sheet
/// under a random rigid motion; normals are random unit vectors biased
/// toward the sheet's +Z.
pub fn random_layout(rng: &mut impl Rng, max_triangles: usize) -> Mesh {
    let max_cells = (max_triangles / 2).max(1);
    let cols = rng.gen_range(1..=max_cells.min(4));
    let rows = rng.gen_range(1..=(max_cells / cols).max(1));
    let grid: Vec<Vec2> = (0..=rows)
        .flat_map(|j| (0..=cols).map(move |i| (i, j)))
        .map(|(i, j)| {
            let mut uv = Vec2::new(i as f32 / cols as f32, j as f32 / rows as f32);
            // Interior vertices move by at most a fifth of a cell, which keeps
            // every cell convex so either diagonal gives a valid split.
            if i > 0 && i < cols {
                uv.x += rng.gen_range(-0.2..0.2) / cols as f32;
            }
            if j > 0 && j < rows {
                uv.y += rng.gen_range(-0.2..0.2) / rows as f32;
            }
            uv
        })
        .collect();

    let bump = rng.gen_range(0.0..0.3f32);
    let phase = rng.gen_range(0.0..6.0f32);
    let rotation = random_rotation(rng);
    let offset = Vec3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let vertices: Vec<Vertex> = grid
        .iter()
        .map(|&uv| {
            let h = bump * (uv.x * 5.0 + phase).sin() * (uv.y * 4.0).cos();
            let local_normal = (Vec3::Z * 1.5 + unit_vector(rng)).normalize();
            Vertex {
                position: rotation * uv.extend(h) + offset,
                normal: rotation * local_normal,
                uv,
            }
        })
        .collect();

    let id = |i: usize, j: usize| (j * (cols + 1) + i) as u32;
    let mut triangles = Vec::new();
    for j in 0..rows {
        for i in 0..cols {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if rng.gen_bool(0.5) {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let keep = rng.gen_range(1..=triangles.len().min(max_triangles));
    while triangles.len() > keep {
        let k = rng.gen_range(0..triangles.len());
        triangles.swap_remove(k);
    }
    Mesh::new(vertices, triangles).expect("random layout is well formed")
}

pub fn random_decal(rng: &mut impl Rng) -> Texture {
    let w = rng.gen_range(1..=16);
    let h = rng.gen_range(1..=16);
    let transparent = rng.gen_bool(0.3);
    Texture::from_fn(w, h, |_, _| {
        let a = if transparent && rng.gen_bool(0.3) {
            rng.gen_range(0..=255)
        } else {
            255
        };
        [rng.gen(), rng.gen(), rng.gen(), a]
    })
    .unwrap()
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub mesh: Mesh,
    pub width: u32,
    pub height: u32,
    pub position: Vec3,
    pub orientation: Quat,
    pub scale: Vec3,
    pub decal: Arc<Texture>,
    pub options: StampOptions,
    pub base: Texture,
}

impl Scene {
    pub fn projector(&self) -> DecalProjector {
        DecalProjector::new(
            self.position,
            self.orientation,
            self.scale,
            self.decal.clone(),
        )
        .expect("scene projector is valid")
    }
}

/// A random end-to-end scene: ≤ `max_triangles` triangles, maps up to
/// `max_size` per side, a random valid projector aimed roughly at the mesh.
pub fn random_scene(rng: &mut impl Rng, max_triangles: usize, max_size: u32) -> Scene {
    let mesh = random_layout(rng, max_triangles);
    let width = rng.gen_range(4..=max_size);
    let height = rng.gen_range(4..=max_size);
    let (lo, hi) = mesh.bounds();
    let center = (lo + hi) * 0.5;
    let position = center
        + Vec3::new(
            rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.3..0.3),
        );
    // Half the scenes look against the average normal so most texels face
    // the projector; the rest use an arbitrary orientation.
    let orientation = if rng.gen_bool(0.5) {
        let n: Vec3 = mesh
            .vertices()
            .iter()
            .map(|v| v.normal)
            .sum::<Vec3>()
            .normalize_or_zero();
        let toward = if n == Vec3::ZERO { Vec3::Z } else { n };
        let align = Quat::from_rotation_arc(Vec3::Z, toward);
        let twist = Quat::from_axis_angle(Vec3::Z, rng.gen_range(0.0..std::f32::consts::TAU));
        (align * twist).normalize()
    } else {
        random_rotation(rng)
    };
    let scale = Vec3::new(
        rng.gen_range(0.1..0.8),
        rng.gen_range(0.1..0.8),
        rng.gen_range(0.1..1.5),
    );
    let options = StampOptions {
        blend_mode: BlendMode::Copy,
        filter: Filter::Nearest,
        cull_cosine: if rng.gen_bool(0.5) {
            0.0
        } else {
            rng.gen_range(-0.5..0.5)
        },
        alpha_threshold: if rng.gen_bool(0.7) {
            0.0
        } else {
            rng.gen_range(0.0..1.0)
        },
    };
    let base = Texture::from_fn(width, height, |_, _| {
        [rng.gen(), rng.gen(), rng.gen(), rng.gen()]
    })
    .unwrap();
    Scene {
        mesh,
        width,
        height,
        position,
        orientation,
        scale,
        decal: Arc::new(random_decal(rng)),
        options,
        base,
    }
}

/// Texel-center classification from the reference rasterizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleTexel {
    Outside,
    /// Inside exactly one triangle with every barycentric weight clear of 0.
    Inside {
        triangle: usize,
        weights: [f64; 3],
    },
    /// Within `AMBIGUITY_EPS` of some triangle edge; the tie rule decides.
    Ambiguous,
}

pub const AMBIGUITY_EPS: f64 = 1e-9;

/// UV position of texel `(x, y)`'s center.
pub fn texel_center_uv(x: u32, y: u32, width: u32, height: u32) -> [f64; 2] {
    [
        (x as f64 + 0.5) / width as f64,
        1.0 - (y as f64 + 0.5) / height as f64,
    ]
}

/// Barycentric weights of `p` in UV triangle `(a, b, c)`.
pub fn barycentric(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> [f64; 3] {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let wb = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let wc = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - wb - wc, wb, wc]
}

/// Point-in-triangle at every texel center, by direct enumeration.
pub fn classify_texels(mesh: &Mesh, width: u32, height: u32) -> Vec<OracleTexel> {
    let tris: Vec<[[f64; 2]; 3]> = (0..mesh.triangle_count())
        .map(|t| mesh.triangle(t).map(|v| [v.uv.x as f64, v.uv.y as f64]))
        .collect();
    let mut out = Vec::with_capacity((width * height) as usize);
    for y in 0..height {
        for x in 0..width {
            let p = texel_center_uv(x, y, width, height);
            let mut state = OracleTexel::Outside;
            for (t, &[a, b, c]) in tris.iter().enumerate() {
                let w = barycentric(a, b, c, p);
                if w.iter().any(|&k| k.abs() <= AMBIGUITY_EPS)
                    && w.iter().all(|&k| k >= -AMBIGUITY_EPS)
                {
                    state = OracleTexel::Ambiguous;
                    break;
                }
                if w.iter().all(|&k| k > 0.0) {
                    state = match state {
                        OracleTexel::Outside => OracleTexel::Inside {
                            triangle: t,
                            weights: w,
                        },
                        _ => OracleTexel::Ambiguous,
                    };
                }
            }
            out.push(state);
        }
    }
    out
}

/// Reference position and normal for an inside texel.
pub fn oracle_attributes(mesh: &Mesh, triangle: usize, weights: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let v = mesh.triangle(triangle);
    let mut p = [0.0; 3];
    let mut n = [0.0; 3];
    for k in 0..3 {
        for c in 0..3 {
            p[c] += weights[k] * v[k].position[c] as f64;
            n[c] += weights[k] * v[k].normal[c] as f64;
        }
    }
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    (p, n.map(|c| c / len))
}

/// Chebyshev-distance scan: the texels a radius-`r` dilation should fill.
pub fn dilation_ring(maps: &LocalSpaceMaps, r: u32) -> Vec<TexelCoord> {
    let (w, h) = maps.dimensions();
    let covered: Vec<TexelCoord> = (0..h)
        .flat_map(|y| (0..w).map(move |x| TexelCoord::new(x, y)))
        .filter(|&t| maps.coverage(t) == decalpaint_core::Coverage::Covered)
        .collect();
    let mut ring = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let t = TexelCoord::new(x, y);
            if maps.coverage(t) != decalpaint_core::Coverage::Uncovered {
                continue;
            }
            let near = covered.iter().any(|c| {
                let d = (c.x as i64 - x as i64)
                    .abs()
                    .max((c.y as i64 - y as i64).abs());
                d <= r as i64
            });
            if near {
                ring.push(t);
            }
        }
    }
    ring
}

type D3 = [f64; 3];

fn dot(a: D3, b: D3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: D3, b: D3) -> D3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add_scaled(a: D3, b: D3, s: f64) -> D3 {
    [a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s]
}

fn cross(a: D3, b: D3) -> D3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Rotates `v` by unit quaternion `(x, y, z, w)`: v + 2w(q×v) + 2q×(q×v).
pub fn rotate(q: [f64; 4], v: D3) -> D3 {
    let u = [q[0], q[1], q[2]];
    let t = cross(u, v);
    let tt = cross(u, t);
    [
        v[0] + 2.0 * q[3] * t[0] + 2.0 * tt[0],
        v[1] + 2.0 * q[3] * t[1] + 2.0 * tt[1],
        v[2] + 2.0 * q[3] * t[2] + 2.0 * tt[2],
    ]
}

/// Literal ray cast: from the surface point along the projector's +Z (toward
/// the projector), intersect the decal plane through the box center and
/// bounds-check in plane coordinates. Returns decal uv on a hit.
pub fn ray_cast_decal(
    position: Vec3,
    normal: Vec3,
    center: Vec3,
    orientation: Quat,
    scale: Vec3,
    cull_cosine: f32,
) -> Option<[f64; 2]> {
    let len = (orientation.x as f64)
        .hypot(orientation.y as f64)
        .hypot(orientation.z as f64)
        .hypot(orientation.w as f64);
    let q = [
        orientation.x as f64 / len,
        orientation.y as f64 / len,
        orientation.z as f64 / len,
        orientation.w as f64 / len,
    ];
    let right = rotate(q, [1.0, 0.0, 0.0]);
    let up = rotate(q, [0.0, 1.0, 0.0]);
    let forward = rotate(q, [0.0, 0.0, -1.0]);
    let n = [normal.x as f64, normal.y as f64, normal.z as f64];
    if dot(n, forward) >= cull_cosine as f64 {
        return None;
    }
    let origin = [position.x as f64, position.y as f64, position.z as f64];
    let c = [center.x as f64, center.y as f64, center.z as f64];
    let dir = forward.map(|k| -k);
    // Plane through c with normal `forward`.
    let t = dot(sub(c, origin), forward) / dot(dir, forward);
    if t.abs() > scale.z as f64 {
        return None;
    }
    let hit = add_scaled(origin, dir, t);
    let rel = sub(hit, c);
    let a = dot(rel, right) / scale.x as f64;
    let b = dot(rel, up) / scale.y as f64;
    if a.abs() > 1.0 || b.abs() > 1.0 {
        return None;
    }
    Some([(a + 1.0) / 2.0, (1.0 - b) / 2.0])
}

fn nearest(decal: &Texture, uv: [f64; 2]) -> [u8; 4] {
    let (w, h) = decal.dimensions();
    let x = ((uv[0] * w as f64).floor().max(0.0) as u32).min(w - 1);
    let y = ((uv[1] * h as f64).floor().max(0.0) as u32).min(h - 1);
    decal.get(x, y)
}

/// Reference stamp for Copy + Nearest scenes.
pub fn reference_stamp(scene: &Scene, maps: &LocalSpaceMaps) -> Texture {
    assert_eq!(scene.options.blend_mode, BlendMode::Copy);
    assert_eq!(scene.options.filter, Filter::Nearest);
    let mut out = scene.base.clone();
    for y in 0..maps.height() {
        for x in 0..maps.width() {
            let t = TexelCoord::new(x, y);
            if !maps.coverage(t).has_surface() {
                continue;
            }
            let Some(uv) = ray_cast_decal(
                maps.position(t),
                maps.normal(t),
                scene.position,
                scene.orientation,
                scene.scale,
                scene.options.cull_cosine,
            ) else {
                continue;
            };
            let src = nearest(&scene.decal, uv);
            if src[3] as f32 > scene.options.alpha_threshold * 255.0 {
                out.set(x, y, src);
            }
        }
    }
    out
}
