use decalpaint_core::localmaps::{generate_local_space_maps_counted, GenerationCounters};
use decalpaint_core::{
    dilate_maps, fixtures, generate_local_space_maps, validate_mesh, Coverage, Mesh, TexelCoord,
    Vertex,
};
use decalpaint_testkit::{self as kit, OracleTexel};
use glam::{Vec2, Vec3};
use proptest::prelude::*;

fn flat_vertex(uv: Vec2) -> Vertex {
    Vertex {
        position: uv.extend(0.0),
        normal: Vec3::Z,
        uv,
    }
}

/// Top-left-rule inside test in exact integer arithmetic. Coordinates are
/// pixel-space values doubled so texel centers are odd integers.
fn integer_inside(tri: [[i64; 2]; 3], p: [i64; 2]) -> bool {
    let edge =
        |a: [i64; 2], b: [i64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let [a, mut b, mut c] = tri;
    let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if area < 0 {
        std::mem::swap(&mut b, &mut c);
    }
    let owns = |a: [i64; 2], b: [i64; 2]| {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        dy < 0 || (dy == 0 && dx > 0)
    };
    [(a, b), (b, c), (c, a)].iter().all(|&(s, e)| {
        let v = edge(s, e);
        v > 0 || (v == 0 && owns(s, e))
    })
}

#[test]
fn right_triangle_matches_exact_enumeration() {
    let mesh = Mesh::new(
        vec![
            flat_vertex(Vec2::new(0.0, 0.0)),
            flat_vertex(Vec2::new(1.0, 0.0)),
            flat_vertex(Vec2::new(0.0, 1.0)),
        ],
        vec![[0, 1, 2]],
    )
    .unwrap();
    let maps = generate_local_space_maps(&mesh, 8, 8).unwrap();

    // UV (0,0),(1,0),(0,1) on 8x8 -> pixel (0,8),(8,8),(0,0), doubled.
    let tri = [[0, 16], [16, 16], [0, 0]];
    let mut expected = 0;
    for y in 0..8 {
        for x in 0..8 {
            let inside = integer_inside(tri, [2 * x + 1, 2 * y + 1]);
            expected += inside as usize;
            assert_eq!(
                maps.coverage(TexelCoord::new(x as u32, y as u32)) == Coverage::Covered,
                inside,
                "texel ({x},{y})"
            );
        }
    }
    // Centers on the hypotenuse belong to the neighbor across it, so only
    // the 28 strictly-inside texels remain.
    assert_eq!(expected, 28);
    assert_eq!(maps.count(Coverage::Covered), 28);
}

#[test]
fn canonical_quad_diagonal_is_claimed_once() {
    for size in [2, 3, 4, 7, 8, 31, 64] {
        let (maps, c) =
            generate_local_space_maps_counted(&fixtures::unit_quad(), size, size).unwrap();
        assert_eq!(maps.count(Coverage::Covered), (size * size) as usize);
        assert_eq!(c.texel_writes, (size * size) as u64);
        assert_eq!(c.max_writes_per_texel, 1);
    }
}

#[test]
fn quad_interpolation_is_identity_map() {
    let size = 256;
    let maps = generate_local_space_maps(&fixtures::unit_quad(), size, size).unwrap();
    for y in 0..size {
        for x in 0..size {
            let t = TexelCoord::new(x, y);
            let uv = kit::texel_center_uv(x, y, size, size);
            let p = maps.position(t);
            assert!((p.x as f64 - uv[0]).abs() < 1e-6 && (p.y as f64 - uv[1]).abs() < 1e-6);
            assert_eq!(p.z, 0.0);
            assert_eq!(maps.normal(t), Vec3::Z);
        }
    }
}

#[test]
fn shrunk_quad_dilates_exactly_the_missing_ring() {
    let maps = generate_local_space_maps(&fixtures::unit_quad(), 8, 8).unwrap();
    let border: Vec<TexelCoord> = (0..8u32)
        .flat_map(|y| (0..8u32).map(move |x| TexelCoord::new(x, y)))
        .filter(|t| t.x == 0 || t.y == 0 || t.x == 7 || t.y == 7)
        .collect();
    let shrunk = maps.with_uncovered(border.iter().copied());
    let expected = kit::dilation_ring(&shrunk, 1);
    assert_eq!(expected, border);

    let dilated = dilate_maps(&shrunk, 1);
    let got: Vec<TexelCoord> = (0..8u32)
        .flat_map(|y| (0..8u32).map(move |x| TexelCoord::new(x, y)))
        .filter(|&t| dilated.coverage(t) == Coverage::Dilated)
        .collect();
    assert_eq!(got, expected);
    // Corner (0,0) copies its diagonal neighbor (1,1).
    assert_eq!(
        dilated.position(TexelCoord::new(0, 0)),
        shrunk.position(TexelCoord::new(1, 1))
    );
    // Edge texel (3,0) has (2,1),(3,1),(4,1) at distance 1; (2,1) wins on x.
    assert_eq!(
        dilated.position(TexelCoord::new(3, 0)),
        shrunk.position(TexelCoord::new(2, 1))
    );
}

fn check_against_oracle(mesh: &Mesh, w: u32, h: u32) -> GenerationCounters {
    let (maps, counters) = generate_local_space_maps_counted(mesh, w, h).unwrap();
    let oracle = kit::classify_texels(mesh, w, h);
    for y in 0..h {
        for x in 0..w {
            let t = TexelCoord::new(x, y);
            match oracle[(y * w + x) as usize] {
                OracleTexel::Outside => {
                    assert_eq!(maps.coverage(t), Coverage::Uncovered, "{t:?}");
                    assert_eq!(maps.position(t), Vec3::ZERO);
                    assert_eq!(maps.normal(t), Vec3::ZERO);
                }
                OracleTexel::Inside { triangle, weights } => {
                    assert_eq!(maps.coverage(t), Coverage::Covered, "{t:?}");
                    let (p, n) = kit::oracle_attributes(mesh, triangle, weights);
                    let (gp, gn) = (maps.position(t), maps.normal(t));
                    for c in 0..3 {
                        assert!((gp[c] as f64 - p[c]).abs() <= 1e-5, "{t:?} position");
                        assert!((gn[c] as f64 - n[c]).abs() <= 1e-5, "{t:?} normal");
                    }
                    // Interpolated positions stay inside the triangle's box.
                    let v = mesh.triangle(triangle);
                    let lo = v[0].position.min(v[1].position).min(v[2].position);
                    let hi = v[0].position.max(v[1].position).max(v[2].position);
                    let slack = Vec3::splat(1e-6);
                    assert!(gp.cmpge(lo - slack).all() && gp.cmple(hi + slack).all());
                    assert!((gn.length() - 1.0).abs() <= 1e-4);
                }
                OracleTexel::Ambiguous => {}
            }
        }
    }
    counters
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generation_matches_brute_force(seed in any::<u64>(), w in 1u32..=64, h in 1u32..=64) {
        let mut rng = kit::rng(seed);
        let mesh = kit::random_layout(&mut rng, 32);
        prop_assume!(mesh.triangle_count() as u32 <= w * h);
        let counters = check_against_oracle(&mesh, w, h);
        prop_assert!(counters.max_writes_per_texel <= 1);
        prop_assert!(counters.texel_writes <= (w * h) as u64);
    }

    #[test]
    fn disjoint_layouts_never_report_overlap(seed in any::<u64>(), w in 1u32..=96, h in 1u32..=96) {
        let mut rng = kit::rng(seed);
        let mesh = kit::random_layout(&mut rng, 32);
        let report = validate_mesh(&mesh, w, h);
        prop_assert!(report.uv_overlap_texels.is_empty());
        prop_assert_eq!(report.budget_ok, mesh.triangle_count() as u64 <= (w * h) as u64);
    }

    /// Two triangles sharing an edge whose endpoints sit on texel centers, so
    /// centers land exactly on the shared edge.
    #[test]
    fn shared_edges_are_claimed_once(
        size in 4u32..=32,
        a in (0u32..32, 0u32..32),
        b in (0u32..32, 0u32..32),
        left in 0.05f32..0.5,
        right in 0.05f32..0.5,
    ) {
        let center = |(x, y): (u32, u32)| {
            let uv = kit::texel_center_uv(x % size, y % size, size, size);
            Vec2::new(uv[0] as f32, uv[1] as f32)
        };
        let (pa, pb) = (center(a), center(b));
        prop_assume!(pa != pb);
        let d = pb - pa;
        let mid = (pa + pb) * 0.5;
        let normal = d.perp();
        let q = (mid + normal * left).clamp(Vec2::ZERO, Vec2::ONE);
        let r = (mid - normal * right).clamp(Vec2::ZERO, Vec2::ONE);
        let mesh = Mesh::new(
            vec![flat_vertex(pa), flat_vertex(pb), flat_vertex(q), flat_vertex(r)],
            vec![[0, 1, 2], [1, 0, 3]],
        )
        .unwrap();
        prop_assume!(mesh.triangle_count() == 2);
        // Clamping can fold one apex over the shared edge.
        let side = |p: Vec2| d.perp_dot(p - pa);
        prop_assume!(side(q) > 0.0 && side(r) < 0.0);

        let report = validate_mesh(&mesh, size, size);
        prop_assert!(report.uv_overlap_texels.is_empty(), "{:?}", report.uv_overlap_texels);
        let maps = generate_local_space_maps(&mesh, size, size).unwrap();
        // Every texel center strictly inside the shared segment is covered by
        // exactly one of the two triangles.
        let (ax, ay) = (a.0 % size, a.1 % size);
        let (bx, by) = (b.0 % size, b.1 % size);
        let steps = (ax as i64 - bx as i64).abs().max((ay as i64 - by as i64).abs());
        for k in 1..steps {
            let num_x = ax as i64 * (steps - k) + bx as i64 * k;
            let num_y = ay as i64 * (steps - k) + by as i64 * k;
            if num_x % steps == 0 && num_y % steps == 0 {
                let t = TexelCoord::new((num_x / steps) as u32, (num_y / steps) as u32);
                prop_assert_eq!(maps.coverage(t), Coverage::Covered);
            }
        }
    }
}
