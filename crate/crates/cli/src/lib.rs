//! The `decalpaint` command line: bake local-space maps, apply scripted
//! stamps, benchmark the pipeline and serve the painting API.
//!
//! Exit codes: 0 on success, 1 on I/O failure, 2 on invalid input (mesh
//! over budget or overlapping, texture/map size mismatch, bad script).

mod bench;
mod script;

pub use bench::{full_coverage_projector, run_bench, BenchReport, Timing};
pub use script::StampScript;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use decalpaint_core::localmaps::{debug_texture, MapKind, MAX_DIMENSION};
use decalpaint_core::{
    apply_stamp, decode_lsmap, dilate_maps, encode_lsmap, load_png, parse_obj, save_png,
    validate_mesh, CacheOutcome, Coverage, MapsCache, MapsError, Mesh, StampStats, Texture,
};
use decalpaint_service::{AppState, ServiceConfig};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(
    name = "decalpaint",
    version,
    about = "Reverse-projection decal painting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bake local-space position/normal maps for a mesh into an LSM1 file.
    Genmaps {
        mesh: PathBuf,
        #[arg(long)]
        size: u32,
        #[arg(long)]
        out: PathBuf,
        /// Seam dilation radius in texels (0 disables).
        #[arg(long, default_value_t = 2)]
        dilate: u32,
        /// Reuse maps across runs when the mesh is unchanged.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Also write <out>.position.png and <out>.normal.png.
        #[arg(long)]
        debug_pngs: bool,
    },
    /// Apply a stamp script to a texture.
    Stamp {
        maps: PathBuf,
        texture: PathBuf,
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time generation and a full-coverage stamp, single-threaded.
    Bench {
        mesh: PathBuf,
        #[arg(long, default_value_t = 512)]
        size: u32,
        #[arg(long, default_value_t = 20)]
        iterations: u32,
        #[arg(long, default_value_t = 3)]
        warmup: u32,
    },
    /// Serve the HTTP/WebSocket painting API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 2)]
        dilate: u32,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Runtime(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn check_size(size: u32) -> Result<(), CliError> {
    if size == 0 || size > MAX_DIMENSION {
        return Err(CliError::Invalid(format!(
            "--size must be in 1..={MAX_DIMENSION}, got {size}"
        )));
    }
    Ok(())
}

fn load_mesh(path: &Path) -> Result<Mesh, CliError> {
    parse_obj(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_texture(path: &Path) -> Result<Texture, CliError> {
    load_png(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// Turns a rasterization failure into the full validation report.
fn rejection(mesh: &Mesh, size: u32, err: MapsError) -> CliError {
    match err {
        MapsError::BudgetExceeded { .. } | MapsError::OverlapDetected { .. } => CliError::Invalid(
            format!("mesh rejected: {}", validate_mesh(mesh, size, size)),
        ),
        MapsError::CacheIo(e) => CliError::Runtime(format!("maps cache: {e}")),
        other => CliError::Invalid(other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenmapsSummary {
    pub outcome: CacheOutcome,
    pub covered: usize,
    pub dilated: usize,
    pub size: u32,
}

pub fn cmd_genmaps(
    mesh_path: &Path,
    size: u32,
    out: &Path,
    dilate: u32,
    cache_dir: Option<&Path>,
    debug_pngs: bool,
) -> Result<GenmapsSummary, CliError> {
    check_size(size)?;
    let mesh = load_mesh(mesh_path)?;
    let mut cache = cache_dir.map_or_else(MapsCache::new, MapsCache::with_dir);
    let (maps, outcome) = cache
        .get_or_generate(&mesh, size, size)
        .map_err(|e| rejection(&mesh, size, e))?;
    let maps = if dilate > 0 {
        Arc::new(dilate_maps(&maps, dilate))
    } else {
        maps
    };
    let bytes = encode_lsmap(&maps).map_err(|e| CliError::Invalid(e.to_string()))?;
    write(out, &bytes)?;
    if debug_pngs {
        let (lo, hi) = mesh.bounds();
        let (min, max) = (lo.min_element(), hi.max_element());
        write(
            &out.with_extension("position.png"),
            &save_png(&debug_texture(&maps, MapKind::Position, min, max)),
        )?;
        write(
            &out.with_extension("normal.png"),
            &save_png(&debug_texture(&maps, MapKind::Normal, -1.0, 1.0)),
        )?;
    }
    Ok(GenmapsSummary {
        outcome,
        covered: maps.count(Coverage::Covered),
        dilated: maps.count(Coverage::Dilated),
        size,
    })
}

/// Applies every stamp of the script in order and writes the painted PNG.
/// Nothing is written unless every input validates.
pub fn cmd_stamp(
    maps_path: &Path,
    texture_path: &Path,
    script_path: &Path,
    out: &Path,
) -> Result<Vec<StampStats>, CliError> {
    let maps = decode_lsmap(&read(maps_path)?)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", maps_path.display())))?;
    let mut texture = load_texture(texture_path)?;
    let text = String::from_utf8(read(script_path)?).map_err(|_| {
        CliError::Invalid(format!("{}: script is not UTF-8", script_path.display()))
    })?;
    let script = StampScript::parse(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", script_path.display())))?;
    if texture.dimensions() != maps.dimensions() {
        return Err(CliError::Invalid(format!(
            "texture is {}x{} but maps are {}x{}; they must match",
            texture.width(),
            texture.height(),
            maps.width(),
            maps.height()
        )));
    }

    let base = script_path.parent().unwrap_or(Path::new("."));
    let mut decals = std::collections::BTreeMap::new();
    for name in script.decals.keys() {
        let path = script.decal_path(base, name);
        decals.insert(name.clone(), Arc::new(load_texture(&path)?));
    }
    let mut projectors = Vec::with_capacity(script.stamps.len());
    for (i, s) in script.stamps.iter().enumerate() {
        let p = s
            .projector(Arc::clone(&decals[&s.decal_id]))
            .map_err(|e| CliError::Invalid(format!("stamp {i}: {e}")))?;
        projectors.push(p);
    }

    let mut stats = Vec::with_capacity(projectors.len());
    for (s, p) in script.stamps.iter().zip(&projectors) {
        stats.push(
            apply_stamp(&mut texture, &maps, p, &s.options)
                .map_err(|e| CliError::Invalid(e.to_string()))?,
        );
    }
    write(out, &save_png(&texture))?;
    Ok(stats)
}

pub fn cmd_bench(
    mesh_path: &Path,
    size: u32,
    iterations: u32,
    warmup: u32,
) -> Result<BenchReport, CliError> {
    check_size(size)?;
    if iterations == 0 {
        return Err(CliError::Invalid("--iterations must be at least 1".into()));
    }
    let mesh = load_mesh(mesh_path)?;
    let report = validate_mesh(&mesh, size, size);
    if !report.is_valid() {
        return Err(CliError::Invalid(format!("mesh rejected: {report}")));
    }
    Ok(run_bench(&mesh, size, iterations, warmup))
}

pub fn cmd_serve(host: &str, port: u16, config: ServiceConfig) -> Result<(), CliError> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::Runtime(format!("bind {host}:{port}: {e}")))?;
        let addr = listener
            .local_addr()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        eprintln!("listening on http://{addr}");
        decalpaint_service::serve(listener, AppState::new(config))
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))
    })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Genmaps {
            mesh,
            size,
            out,
            dilate,
            cache_dir,
            debug_pngs,
        } => {
            let s = cmd_genmaps(&mesh, size, &out, dilate, cache_dir.as_deref(), debug_pngs)?;
            match s.outcome {
                CacheOutcome::MemoryHit | CacheOutcome::DiskHit => eprintln!("maps cache hit"),
                CacheOutcome::Generated => eprintln!("maps generated"),
            }
            println!(
                "wrote {} ({n}x{n}: {} covered, {} dilated texels)",
                out.display(),
                s.covered,
                s.dilated,
                n = s.size,
            );
        }
        Command::Stamp {
            maps,
            texture,
            script,
            out,
        } => {
            let stats = cmd_stamp(&maps, &texture, &script, &out)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&stats).expect("stats serialize")
            );
        }
        Command::Bench {
            mesh,
            size,
            iterations,
            warmup,
        } => {
            println!("{}", cmd_bench(&mesh, size, iterations, warmup)?);
        }
        Command::Serve {
            port,
            host,
            dilate,
            cache_dir,
        } => {
            let config = ServiceConfig {
                dilate_radius: dilate,
                cache_dir,
                ..Default::default()
            };
            cmd_serve(&host, port, config)?;
        }
    }
    Ok(())
}
