use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use decalpaint_core::localmaps::generate_local_space_maps_counted;
use decalpaint_core::{apply_stamp, fixtures, DecalProjector, Mesh, StampOptions, Texture};
use glam::{Quat, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub mean: f64,
    pub stddev: f64,
}

impl Timing {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stddev: var.sqrt(),
        }
    }
}

impl fmt::Display for Timing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} ± {:.4} s", self.mean, self.stddev)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub triangles: usize,
    pub width: u32,
    pub height: u32,
    pub iterations: u32,
    pub warmup: u32,
    pub genmaps: Timing,
    pub stamp: Timing,
    pub generation_writes: u64,
    pub stamp_visits: u64,
    pub painted: u64,
}

impl BenchReport {
    pub fn total_visits(&self) -> u64 {
        self.generation_writes + self.stamp_visits
    }

    pub fn visit_bound(&self) -> u64 {
        2 * self.width as u64 * self.height as u64
    }

    pub fn within_bound(&self) -> bool {
        self.total_visits() <= self.visit_bound()
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "mesh: {} triangles, {}x{} texels, {} iterations after {} warmup, single-threaded",
            self.triangles, self.width, self.height, self.iterations, self.warmup
        )?;
        writeln!(f, "genmaps: {}", self.genmaps)?;
        writeln!(f, "stamp: {}", self.stamp)?;
        writeln!(
            f,
            "texel visits: generate {} + stamp {} = {} (2*W*H = {}, painted {})",
            self.generation_writes,
            self.stamp_visits,
            self.total_visits(),
            self.visit_bound(),
            self.painted
        )?;
        write!(f, "visits ≤ 2*W*H = {}", self.within_bound())
    }
}

/// A projector looking down −Z whose box spans the mesh's bounding box.
pub fn full_coverage_projector(mesh: &Mesh, decal: Arc<Texture>) -> DecalProjector {
    let (lo, hi) = mesh.bounds();
    let center = (lo + hi) * 0.5;
    let half = (hi - lo) * 0.5;
    let scale = Vec3::new(half.x.max(1e-6), half.y.max(1e-6), half.z + 1.0);
    DecalProjector::new(center, Quat::IDENTITY, scale, decal).expect("bounds are finite")
}

/// Times map generation and one full-coverage stamp on a single thread.
/// The mesh must already fit the map.
pub fn run_bench(mesh: &Mesh, size: u32, iterations: u32, warmup: u32) -> BenchReport {
    let decal = Arc::new(fixtures::gradient(size, size));
    let projector = full_coverage_projector(mesh, decal);
    let options = StampOptions::default();
    let base = Texture::new(size, size, [0, 0, 0, 255]).expect("size checked by caller");

    let mut gen_times = Vec::new();
    let mut stamp_times = Vec::new();
    let mut last = None;
    for i in 0..warmup + iterations {
        let t0 = Instant::now();
        let (maps, counters) =
            generate_local_space_maps_counted(mesh, size, size).expect("mesh validated by caller");
        let t1 = Instant::now();
        let mut target = base.clone();
        let t2 = Instant::now();
        let stats =
            apply_stamp(&mut target, &maps, &projector, &options).expect("maps match texture");
        let t3 = Instant::now();
        if i >= warmup {
            gen_times.push((t1 - t0).as_secs_f64());
            stamp_times.push((t3 - t2).as_secs_f64());
        }
        last = Some((counters, stats));
    }
    let (counters, stats) = last.expect("at least one iteration");
    BenchReport {
        triangles: mesh.triangle_count(),
        width: size,
        height: size,
        iterations,
        warmup,
        genmaps: Timing::from_samples(&gen_times),
        stamp: Timing::from_samples(&stamp_times),
        generation_writes: counters.texel_writes,
        stamp_visits: stats.texel_visits,
        painted: stats.painted,
    }
}
