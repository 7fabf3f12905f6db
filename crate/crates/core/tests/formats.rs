use decalpaint_core::{
    decode_lsmap, encode_lsmap, load_png, parse_obj, save_png, Coverage, LocalSpaceMaps, Texture,
};
use decalpaint_testkit as kit;
use proptest::prelude::*;

fn bits(maps: &LocalSpaceMaps) -> (Vec<u32>, Vec<u32>) {
    let flat = |v: &[glam::Vec3]| {
        v.iter()
            .flat_map(|p| p.to_array().map(f32::to_bits))
            .collect()
    };
    (flat(maps.positions()), flat(maps.normals()))
}

fn arb_maps() -> impl Strategy<Value = Vec<u8>> {
    (1u32..=12, 1u32..=12, any::<bool>(), any::<u64>()).prop_flat_map(|(w, h, dil, fp)| {
        let n = (w * h) as usize;
        let cov_max = if dil { 2u8 } else { 1 };
        (
            prop::collection::vec(any::<u32>(), n * 6),
            prop::collection::vec(0u8..=cov_max, n),
        )
            .prop_map(move |(floats, cov)| {
                let mut out = b"LSM1".to_vec();
                out.extend(w.to_le_bytes());
                out.extend(h.to_le_bytes());
                out.push(dil as u8);
                for f in floats {
                    out.extend(f.to_le_bytes());
                }
                out.extend(cov);
                out.extend(fp.to_le_bytes());
                out
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Arbitrary bit patterns (NaNs included) survive decode/encode.
    #[test]
    fn lsm1_round_trip_is_bit_exact(bytes in arb_maps()) {
        let maps = decode_lsmap(&bytes).unwrap();
        let again = encode_lsmap(&maps).unwrap();
        prop_assert_eq!(&again, &bytes);
        let back = decode_lsmap(&again).unwrap();
        prop_assert_eq!(bits(&back), bits(&maps));
        prop_assert_eq!(back.coverage_mask(), maps.coverage_mask());
        prop_assert_eq!(back.mesh_fingerprint(), maps.mesh_fingerprint());
        prop_assert_eq!(back.has_dilation(), maps.has_dilation());
        prop_assert!(maps.coverage_mask().iter().all(|&c| c != Coverage::Dilated || maps.has_dilation()));
    }

    #[test]
    fn png_round_trip_is_lossless(w in 1u32..=16, h in 1u32..=16, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = kit::rng(seed);
        let tex = Texture::from_fn(w, h, |_, _| rng.gen()).unwrap();
        prop_assert_eq!(load_png(&save_png(&tex)).unwrap(), tex);
    }

    #[test]
    fn generated_maps_round_trip(seed in any::<u64>(), w in 1u32..=32, h in 1u32..=32) {
        let mut rng = kit::rng(seed);
        let mesh = kit::random_layout(&mut rng, 32);
        prop_assume!(mesh.triangle_count() as u32 <= w * h);
        let maps = decalpaint_core::generate_local_space_maps(&mesh, w, h).unwrap();
        let maps = decalpaint_core::dilate_maps(&maps, seed as u32 % 3);
        prop_assert_eq!(decode_lsmap(&encode_lsmap(&maps).unwrap()).unwrap(), maps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// parse ∘ serialize ∘ parse is the identity on attributes and topology.
    #[test]
    fn obj_reparse_is_identity(seed in any::<u64>()) {
        let mut rng = kit::rng(seed);
        let mesh = kit::random_layout(&mut rng, 32);
        let parsed = parse_obj(mesh.to_obj().as_bytes()).unwrap();
        let reparsed = parse_obj(parsed.to_obj().as_bytes()).unwrap();
        prop_assert_eq!(&reparsed, &parsed);
        let corners = |m: &decalpaint_core::Mesh| -> Vec<[f32; 8]> {
            (0..m.triangle_count())
                .flat_map(|t| m.triangle(t).map(|v| {
                    let (p, n, uv) = (v.position, v.normal, v.uv);
                    [p.x, p.y, p.z, n.x, n.y, n.z, uv.x, uv.y]
                }))
                .collect()
        };
        // Normals renormalize on parse, so allow f32 rounding there.
        for (a, b) in corners(&parsed).iter().zip(corners(&mesh).iter()) {
            for k in 0..8 {
                prop_assert!((a[k] - b[k]).abs() <= 1e-6, "{a:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn random_noise_png_round_trip() {
    use rand::Rng;
    let mut rng = kit::rng(0x5eed);
    let tex = Texture::from_fn(16, 16, |_, _| rng.gen()).unwrap();
    assert_eq!(load_png(&save_png(&tex)).unwrap(), tex);
}
