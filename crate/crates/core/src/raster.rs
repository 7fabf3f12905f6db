//! UV-space triangle scan conversion shared by map generation and overlap
//! validation.
//!
//! Texel `(x, y)` is sampled at its center, which in pixel space is
//! `(x + 0.5, y + 0.5)` with `X = u * W` and `Y = (1 - v) * H`. Edge functions
//! are evaluated in f32 with a canonical vertex order per edge, so the two
//! triangles sharing an edge see exactly negated values. Ties on an edge go to
//! the triangle for which that edge is a top or left edge.

use glam::Vec2;

type P = [f32; 2];

#[inline]
fn raw_edge(a: P, b: P, p: P) -> f32 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

#[inline]
fn lex_greater(a: P, b: P) -> bool {
    a[0] > b[0] || (a[0] == b[0] && a[1] > b[1])
}

/// Edge function of the directed edge `a -> b` at `p`. Antisymmetric in
/// `(a, b)` bit for bit.
#[inline]
fn edge(a: P, b: P, p: P) -> f32 {
    if lex_greater(a, b) {
        -raw_edge(b, a, p)
    } else {
        raw_edge(a, b, p)
    }
}

/// Whether a positively oriented triangle owns points lying exactly on its
/// edge with direction `a -> b` (top-left rule, Y pointing down).
#[inline]
fn owns_edge(a: P, b: P) -> bool {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

#[inline]
fn inside(e: f32, owned: bool) -> bool {
    e > 0.0 || (e == 0.0 && owned)
}

/// Converts a UV coordinate to continuous pixel space.
#[inline]
pub(crate) fn uv_to_pixel(uv: Vec2, width: u32, height: u32) -> P {
    [uv.x * width as f32, (1.0 - uv.y) * height as f32]
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct ScanCounters {
    /// Texel centers evaluated against the edge functions.
    pub tested: u64,
    /// Texel centers found inside.
    pub inside: u64,
}

/// Calls `visit(x, y, weights)` for every texel whose center lies inside the
/// UV triangle. `weights` are barycentric weights for the vertices in the
/// order given. Triangles with zero pixel-space area produce no texels.
pub(crate) fn scan_triangle(
    uv: [Vec2; 3],
    width: u32,
    height: u32,
    counters: &mut ScanCounters,
    mut visit: impl FnMut(u32, u32, [f32; 3]),
) {
    let mut v = uv.map(|t| uv_to_pixel(t, width, height));
    let mut order = [0usize, 1, 2];
    let area = edge(v[0], v[1], v[2]);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    if area < 0.0 {
        v.swap(1, 2);
        order.swap(1, 2);
    }
    let [a, b, c] = v;
    let own_ab = owns_edge(a, b);
    let own_bc = owns_edge(b, c);
    let own_ca = owns_edge(c, a);

    let min_x = a[0].min(b[0]).min(c[0]);
    let max_x = a[0].max(b[0]).max(c[0]);
    let min_y = a[1].min(b[1]).min(c[1]);
    let max_y = a[1].max(b[1]).max(c[1]);
    let x0 = ((min_x - 0.5).ceil().max(0.0)) as i64;
    let x1 = ((max_x - 0.5).floor() as i64).min(width as i64 - 1);
    let y0 = ((min_y - 0.5).ceil().max(0.0)) as i64;
    let y1 = ((max_y - 0.5).floor() as i64).min(height as i64 - 1);
    if x0 > x1 || y0 > y1 {
        return;
    }

    for y in y0..=y1 {
        let py = y as f32 + 0.5;
        for x in x0..=x1 {
            let p = [x as f32 + 0.5, py];
            counters.tested += 1;
            let e_bc = edge(b, c, p);
            if !inside(e_bc, own_bc) {
                continue;
            }
            let e_ca = edge(c, a, p);
            if !inside(e_ca, own_ca) {
                continue;
            }
            let e_ab = edge(a, b, p);
            if !inside(e_ab, own_ab) {
                continue;
            }
            counters.inside += 1;
            let sum = e_ab + e_bc + e_ca;
            let local = [e_bc / sum, e_ca / sum, e_ab / sum];
            let mut weights = [0.0; 3];
            for (slot, w) in order.iter().zip(local) {
                weights[*slot] = w;
            }
            visit(x as u32, y as u32, weights);
        }
    }
}
