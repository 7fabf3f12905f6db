//! Indexed triangle meshes in local space: OBJ ingestion, validation against
//! a map size, and content fingerprinting.

use std::collections::HashMap;
use std::fmt::Write as _;

use glam::{Vec2, Vec3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::localmaps::TexelCoord;
use crate::raster::{scan_triangle, ScanCounters};

/// Accepted deviation of a normalized normal from unit length.
pub const NORMAL_TOLERANCE: f32 = 1e-4;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("line {line}: face corner lacks a texture or normal index")]
    MissingAttribute { line: usize },
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("triangle {triangle} references vertex {index}, but only {count} vertices exist")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        count: usize,
    },
    #[error("vertex {vertex} has uv {uv:?} outside [0,1]^2")]
    UvOutOfRange { vertex: usize, uv: [f32; 2] },
    #[error("vertex {vertex} has a zero-length or non-finite normal")]
    DegenerateNormal { vertex: usize },
    #[error("vertex {vertex} has a non-finite position or uv")]
    NonFinite { vertex: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub position: Vec3,
    pub normal: Vec3,
    pub uv: Vec2,
}

/// A validated triangle mesh. Triangles are counter-clockwise in UV space and
/// have non-zero UV area.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vertex>,
    triangles: Vec<[u32; 3]>,
    dropped_degenerate: usize,
}

impl Mesh {
    /// Builds a mesh, normalizing normals, reorienting triangles to be
    /// counter-clockwise in UV space and dropping triangles with zero UV area.
    pub fn new(mut vertices: Vec<Vertex>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        for (i, v) in vertices.iter_mut().enumerate() {
            if !v.position.is_finite() || !v.uv.is_finite() {
                return Err(MeshError::NonFinite { vertex: i });
            }
            if !(0.0..=1.0).contains(&v.uv.x) || !(0.0..=1.0).contains(&v.uv.y) {
                return Err(MeshError::UvOutOfRange {
                    vertex: i,
                    uv: v.uv.to_array(),
                });
            }
            let len = v.normal.length();
            if !len.is_finite() || len == 0.0 {
                return Err(MeshError::DegenerateNormal { vertex: i });
            }
            // Leaving near-unit normals alone keeps parse/serialize idempotent.
            if (len - 1.0).abs() > 1e-6 {
                v.normal /= len;
            }
        }

        let count = vertices.len();
        let mut kept = Vec::with_capacity(triangles.len());
        let mut dropped = 0;
        for (t, &tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= count) {
                return Err(MeshError::IndexOutOfRange {
                    triangle: t,
                    index,
                    count,
                });
            }
            let [a, b, c] = tri.map(|i| vertices[i as usize].uv.as_dvec2());
            let area = (b - a).perp_dot(c - a);
            if area == 0.0 {
                dropped += 1;
            } else if area < 0.0 {
                kept.push([tri[0], tri[2], tri[1]]);
            } else {
                kept.push(tri);
            }
        }
        Ok(Self {
            vertices,
            triangles: kept,
            dropped_degenerate: dropped,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Triangles removed at construction for having zero UV area.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped_degenerate
    }

    pub fn triangle(&self, t: usize) -> [&Vertex; 3] {
        self.triangles[t].map(|i| &self.vertices[i as usize])
    }

    /// Returns a copy with every normal negated.
    pub fn with_flipped_normals(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            v.normal = -v.normal;
        }
        out
    }

    /// Axis-aligned bounds of the vertex positions.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        self.vertices.iter().fold(
            (Vec3::splat(f32::INFINITY), Vec3::splat(f32::NEG_INFINITY)),
            |(lo, hi), v| (lo.min(v.position), hi.max(v.position)),
        )
    }

    /// 64-bit content hash over vertex attributes and topology. Stable across
    /// processes and builds, so it can key an on-disk cache.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(b"mesh\0");
        h.update((self.vertices.len() as u64).to_le_bytes());
        for v in &self.vertices {
            for c in v
                .position
                .to_array()
                .into_iter()
                .chain(v.normal.to_array())
                .chain(v.uv.to_array())
            {
                h.update(c.to_bits().to_le_bytes());
            }
        }
        h.update((self.triangles.len() as u64).to_le_bytes());
        for t in &self.triangles {
            for i in t {
                h.update(i.to_le_bytes());
            }
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// Writes the mesh back out as OBJ with one `v`/`vt`/`vn` record per vertex.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let p = v.position;
            let _ = writeln!(s, "v {:?} {:?} {:?}", p.x, p.y, p.z);
        }
        for v in &self.vertices {
            let _ = writeln!(s, "vt {:?} {:?}", v.uv.x, v.uv.y);
        }
        for v in &self.vertices {
            let n = v.normal;
            let _ = writeln!(s, "vn {:?} {:?} {:?}", n.x, n.y, n.z);
        }
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| i + 1);
            let _ = writeln!(s, "f {a}/{a}/{a} {b}/{b}/{b} {c}/{c}/{c}");
        }
        s
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> MeshError {
    MeshError::MalformedRecord {
        line,
        reason: reason.into(),
    }
}

fn parse_floats<const N: usize>(
    fields: &mut std::str::SplitWhitespace<'_>,
    line: usize,
    min: usize,
) -> Result<[f32; N], MeshError> {
    let mut out = [0.0f32; N];
    let mut n = 0;
    for (i, tok) in fields.enumerate() {
        // Trailing optional components (w) are accepted and ignored.
        if i >= N {
            tok.parse::<f32>()
                .map_err(|_| malformed(line, format!("bad number {tok:?}")))?;
            continue;
        }
        out[i] = tok
            .parse()
            .map_err(|_| malformed(line, format!("bad number {tok:?}")))?;
        n += 1;
    }
    if n < min {
        return Err(malformed(
            line,
            format!("expected {min} components, got {n}"),
        ));
    }
    Ok(out)
}

fn resolve_index(tok: &str, len: usize, line: usize) -> Result<usize, MeshError> {
    let i: i64 = tok
        .parse()
        .map_err(|_| malformed(line, format!("bad index {tok:?}")))?;
    let resolved = match i {
        0 => return Err(malformed(line, "index 0 is not valid in OBJ")),
        i if i > 0 => i - 1,
        i => len as i64 + i,
    };
    if resolved < 0 || resolved as usize >= len {
        return Err(malformed(line, format!("index {i} out of range")));
    }
    Ok(resolved as usize)
}

/// Parses the `v`/`vt`/`vn`/`f` subset of Wavefront OBJ.
///
/// Face corners must use the `p/t/n` form. Corners are deduplicated on their
/// index triple and polygons are fan-triangulated.
pub fn parse_obj(bytes: &[u8]) -> Result<Mesh, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        malformed(line, "invalid UTF-8")
    })?;

    let mut positions: Vec<Vec3> = Vec::new();
    let mut uvs: Vec<Vec2> = Vec::new();
    let mut normals: Vec<Vec3> = Vec::new();
    // Faces reference attributes that may be declared later, so resolve after
    // the whole file has been read.
    let mut faces: Vec<(usize, Vec<[&str; 3]>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut fields = content.split_whitespace();
        let Some(kind) = fields.next() else { continue };
        match kind {
            "v" => positions.push(Vec3::from_array(parse_floats::<3>(&mut fields, line, 3)?)),
            "vt" => uvs.push(Vec2::from_array(parse_floats::<2>(&mut fields, line, 2)?)),
            "vn" => normals.push(Vec3::from_array(parse_floats::<3>(&mut fields, line, 3)?)),
            "f" => {
                let mut corners = Vec::new();
                for tok in fields {
                    let mut parts = tok.split('/');
                    let p = parts.next().unwrap_or("");
                    let t = parts.next().unwrap_or("");
                    let n = parts.next().unwrap_or("");
                    if parts.next().is_some() {
                        return Err(malformed(line, format!("bad face corner {tok:?}")));
                    }
                    if p.is_empty() {
                        return Err(malformed(line, format!("bad face corner {tok:?}")));
                    }
                    if t.is_empty() || n.is_empty() {
                        return Err(MeshError::MissingAttribute { line });
                    }
                    corners.push([p, t, n]);
                }
                if corners.len() < 3 {
                    return Err(malformed(line, "face needs at least 3 corners"));
                }
                faces.push((line, corners));
            }
            // Grouping, smoothing and material records carry nothing we use.
            "o" | "g" | "s" | "usemtl" | "mtllib" | "l" | "p" => {}
            other => return Err(malformed(line, format!("unsupported record {other:?}"))),
        }
    }

    if faces.is_empty() {
        return Err(MeshError::EmptyMesh);
    }

    let mut vertices = Vec::new();
    let mut dedup: HashMap<(usize, usize, usize), u32> = HashMap::new();
    let mut triangles = Vec::new();
    for (line, corners) in faces {
        let mut ids = Vec::with_capacity(corners.len());
        for [p, t, n] in corners {
            let key = (
                resolve_index(p, positions.len(), line)?,
                resolve_index(t, uvs.len(), line)?,
                resolve_index(n, normals.len(), line)?,
            );
            let id = *dedup.entry(key).or_insert_with(|| {
                vertices.push(Vertex {
                    position: positions[key.0],
                    uv: uvs[key.1],
                    normal: normals[key.2],
                });
                (vertices.len() - 1) as u32
            });
            ids.push(id);
        }
        for k in 1..ids.len() - 1 {
            triangles.push([ids[0], ids[k], ids[k + 1]]);
        }
    }
    Mesh::new(vertices, triangles)
}

/// Outcome of checking a mesh against a local-space map size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub triangle_count: usize,
    pub dropped_degenerate: usize,
    /// Texels whose center is claimed by two or more triangles, row-major.
    pub uv_overlap_texels: Vec<TexelCoord>,
    pub budget_ok: bool,
    pub map_width: u32,
    pub map_height: u32,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.budget_ok && self.uv_overlap_texels.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let capacity = self.map_width as u64 * self.map_height as u64;
        write!(
            f,
            "{} triangles ({} degenerate dropped) on a {}x{} map",
            self.triangle_count, self.dropped_degenerate, self.map_width, self.map_height
        )?;
        if !self.budget_ok {
            write!(
                f,
                "; triangle budget exceeded: {} > {}",
                self.triangle_count, capacity
            )?;
        }
        if let Some(first) = self.uv_overlap_texels.first() {
            write!(
                f,
                "; {} texels claimed by overlapping UV triangles (first at {},{})",
                self.uv_overlap_texels.len(),
                first.x,
                first.y
            )?;
        }
        Ok(())
    }
}

/// Checks the triangle budget and UV uniqueness using the same fill rule as
/// map generation. Never fails; problems are reported.
pub fn validate_mesh(mesh: &Mesh, map_width: u32, map_height: u32) -> ValidationReport {
    let capacity = map_width as u64 * map_height as u64;
    let mut claims = vec![0u8; capacity as usize];
    let mut counters = ScanCounters::default();
    for t in 0..mesh.triangle_count() {
        let uv = mesh.triangle(t).map(|v| v.uv);
        scan_triangle(uv, map_width, map_height, &mut counters, |x, y, _| {
            let c = &mut claims[y as usize * map_width as usize + x as usize];
            *c = c.saturating_add(1);
        });
    }
    let uv_overlap_texels = claims
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= 2)
        .map(|(i, _)| TexelCoord {
            x: (i % map_width as usize) as u32,
            y: (i / map_width as usize) as u32,
        })
        .collect();
    ValidationReport {
        triangle_count: mesh.triangle_count(),
        dropped_degenerate: mesh.dropped_degenerate(),
        uv_overlap_texels,
        budget_ok: mesh.triangle_count() as u64 <= capacity,
        map_width,
        map_height,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const TRI: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 1\n";

    #[test]
    fn parses_single_triangle() {
        let mesh = parse_obj(format!("{TRI}f 1/1/1 2/2/1 3/3/1\n").as_bytes()).unwrap();
        assert_eq!(mesh.vertices().len(), 3);
        assert_eq!(mesh.triangles(), &[[0, 1, 2]]);
        assert_eq!(mesh.vertices()[1].uv, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn face_without_uv_or_normal_is_missing_attribute() {
        let err = parse_obj(format!("{TRI}f 1 2 3\n").as_bytes()).unwrap_err();
        assert_eq!(err, MeshError::MissingAttribute { line: 8 });
        let err = parse_obj(format!("{TRI}f 1//1 2//1 3//1\n").as_bytes()).unwrap_err();
        assert_eq!(err, MeshError::MissingAttribute { line: 8 });
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n\
                   vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nvn 0 0 1\n\
                   f 1/1/1 2/2/1 3/3/1 4/4/1\n";
        let mesh = parse_obj(obj.as_bytes()).unwrap();
        assert_eq!(mesh.triangles(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn malformed_record_reports_line() {
        let err = parse_obj(b"v 0 0 0\nv 1 nope 0\n").unwrap_err();
        assert!(matches!(err, MeshError::MalformedRecord { line: 2, .. }));
        let err = parse_obj(b"v 0 0\n").unwrap_err();
        assert!(matches!(err, MeshError::MalformedRecord { line: 1, .. }));
        let err = parse_obj(format!("{TRI}f 1/1/1 2/2/1 9/3/1\n").as_bytes()).unwrap_err();
        assert!(matches!(err, MeshError::MalformedRecord { line: 8, .. }));
    }

    #[test]
    fn no_faces_is_empty_mesh() {
        assert_eq!(parse_obj(TRI.as_bytes()).unwrap_err(), MeshError::EmptyMesh);
        assert_eq!(parse_obj(b"").unwrap_err(), MeshError::EmptyMesh);
    }

    #[test]
    fn dedup_keeps_uv_seams() {
        // Same position, two different uvs: two vertices.
        let obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvt 0.5 0.5\nvn 0 0 1\n\
                   f 1/1/1 2/2/1 3/3/1\nf 1/4/1 2/2/1 3/3/1\n";
        let mesh = parse_obj(obj.as_bytes()).unwrap();
        assert_eq!(mesh.vertices().len(), 4);
    }

    #[test]
    fn negative_indices_and_comments() {
        let obj = format!("# header\n{TRI}o thing\ns off\nf -3/-3/-1 -2/-2/-1 -1/-1/-1 # tail\n");
        let mesh = parse_obj(obj.as_bytes()).unwrap();
        assert_eq!(mesh.triangle_count(), 1);
    }

    #[test]
    fn normals_are_renormalized() {
        let obj =
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 3\nf 1/1/1 2/2/1 3/3/1\n";
        let mesh = parse_obj(obj.as_bytes()).unwrap();
        for v in mesh.vertices() {
            assert!((v.normal.length() - 1.0).abs() <= NORMAL_TOLERANCE);
        }
    }

    #[test]
    fn clockwise_uv_triangles_are_reoriented_and_degenerates_dropped() {
        let obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvt 0.5 0\nvn 0 0 1\n\
                   f 1/1/1 3/3/1 2/2/1\nf 1/1/1 3/4/1 2/2/1\n";
        let mesh = parse_obj(obj.as_bytes()).unwrap();
        assert_eq!(mesh.triangle_count(), 1);
        assert_eq!(mesh.dropped_degenerate(), 1);
        let [a, b, c] = mesh.triangle(0).map(|v| v.uv);
        assert!((b - a).perp_dot(c - a) > 0.0);
    }

    #[test]
    fn uv_out_of_range_rejected() {
        let obj =
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1.5 0\nvt 0 1\nvn 0 0 1\nf 1/1/1 2/2/1 3/3/1\n";
        assert!(matches!(
            parse_obj(obj.as_bytes()),
            Err(MeshError::UvOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_normal_rejected() {
        let obj =
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nvn 0 0 0\nf 1/1/1 2/2/1 3/3/1\n";
        assert!(matches!(
            parse_obj(obj.as_bytes()),
            Err(MeshError::DegenerateNormal { .. })
        ));
    }

    #[test]
    fn unit_quad_validates_on_4x4() {
        let report = validate_mesh(&fixtures::unit_quad(), 4, 4);
        assert_eq!(report.triangle_count, 2);
        assert!(report.uv_overlap_texels.is_empty());
        assert!(report.budget_ok);
        assert!(report.is_valid());
    }

    #[test]
    fn stacked_triangles_overlap() {
        let quad = fixtures::unit_quad();
        let t = quad.triangles()[0];
        let mesh = Mesh::new(quad.vertices().to_vec(), vec![t, t]).unwrap();
        let report = validate_mesh(&mesh, 4, 4);
        assert!(!report.uv_overlap_texels.is_empty());
        assert!(!report.is_valid());
    }

    #[test]
    fn seventeen_triangles_exceed_4x4_budget() {
        let mesh = fixtures::grid(3, 3, 17);
        assert_eq!(mesh.triangle_count(), 17);
        let report = validate_mesh(&mesh, 4, 4);
        assert!(!report.budget_ok);
        assert!(report.uv_overlap_texels.is_empty());
        assert!(report.to_string().contains("17 > 16"));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = fixtures::unit_quad();
        let mut verts = a.vertices().to_vec();
        verts[0].position.z += 1e-3;
        let b = Mesh::new(verts, a.triangles().to_vec()).unwrap();
        assert_eq!(a.fingerprint(), fixtures::unit_quad().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn obj_writer_round_trips() {
        let corners = |m: &Mesh| -> Vec<Vertex> {
            (0..m.triangle_count())
                .flat_map(|t| m.triangle(t).map(|v| *v))
                .collect()
        };
        let mesh = fixtures::grid(2, 3, 12);
        let back = parse_obj(mesh.to_obj().as_bytes()).unwrap();
        assert_eq!(corners(&back), corners(&mesh));
        // Parsed meshes are already in first-use order, so this is exact.
        assert_eq!(parse_obj(back.to_obj().as_bytes()).unwrap(), back);
    }
}
