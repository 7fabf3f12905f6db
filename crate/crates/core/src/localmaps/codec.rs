//! LSM1: little-endian binary container for [`LocalSpaceMaps`].
//!
//! ```text
//! "LSM1"            4 bytes
//! width             u32
//! height            u32
//! flags             u8   bit0 = dilation mask present
//! positions         W*H*3 f32, row-major from the top row
//! normals           W*H*3 f32
//! coverage          W*H u8   0 uncovered, 1 covered, 2 dilated
//! mesh fingerprint  u64
//! ```

use glam::Vec3;
use thiserror::Error;

use super::{Coverage, LocalSpaceMaps};

pub const LSM1_MAGIC: [u8; 4] = *b"LSM1";
pub const MAX_DIMENSION: u32 = 65535;

const HEADER_LEN: usize = 4 + 4 + 4 + 1;
const FLAG_DILATION: u8 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Lsm1Error {
    #[error("not an LSM1 stream")]
    BadMagic,
    #[error("LSM1 stream truncated: need {expected} bytes, got {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("LSM1 dimensions {width}x{height} exceed {MAX_DIMENSION}")]
    DimensionOverflow { width: u32, height: u32 },
    #[error("LSM1 dimensions must be non-zero")]
    ZeroDimension,
    #[error("unknown LSM1 flag bits {0:#04x}")]
    UnknownFlags(u8),
    #[error("invalid coverage value {value} at texel index {index}")]
    InvalidCoverage { index: usize, value: u8 },
    #[error("{0} unexpected bytes after the LSM1 payload")]
    TrailingBytes(usize),
}

fn payload_len(width: u32, height: u32) -> usize {
    let n = width as usize * height as usize;
    HEADER_LEN + n * 12 * 2 + n + 8
}

pub fn encode_lsmap(maps: &LocalSpaceMaps) -> Result<Vec<u8>, Lsm1Error> {
    let (width, height) = maps.dimensions();
    if width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(Lsm1Error::DimensionOverflow { width, height });
    }
    let mut out = Vec::with_capacity(payload_len(width, height));
    out.extend_from_slice(&LSM1_MAGIC);
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    out.push(if maps.has_dilation() {
        FLAG_DILATION
    } else {
        0
    });
    for v in maps.positions().iter().chain(maps.normals()) {
        for c in v.to_array() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out.extend(maps.coverage_mask().iter().map(|&c| c as u8));
    out.extend_from_slice(&maps.mesh_fingerprint().to_le_bytes());
    Ok(out)
}

pub fn decode_lsmap(bytes: &[u8]) -> Result<LocalSpaceMaps, Lsm1Error> {
    if bytes.len() < LSM1_MAGIC.len() {
        return if LSM1_MAGIC.starts_with(bytes) && !bytes.is_empty() {
            Err(Lsm1Error::TruncatedPayload {
                expected: HEADER_LEN,
                actual: bytes.len(),
            })
        } else {
            Err(Lsm1Error::BadMagic)
        };
    }
    if bytes[..4] != LSM1_MAGIC {
        return Err(Lsm1Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Lsm1Error::TruncatedPayload {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let width = u32_at(4);
    let height = u32_at(8);
    let flags = bytes[12];
    if width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(Lsm1Error::DimensionOverflow { width, height });
    }
    if width == 0 || height == 0 {
        return Err(Lsm1Error::ZeroDimension);
    }
    if flags & !FLAG_DILATION != 0 {
        return Err(Lsm1Error::UnknownFlags(flags));
    }
    let expected = payload_len(width, height);
    if bytes.len() < expected {
        return Err(Lsm1Error::TruncatedPayload {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Lsm1Error::TrailingBytes(bytes.len() - expected));
    }

    let n = width as usize * height as usize;
    let read_vecs = |start: usize| -> Vec<Vec3> {
        bytes[start..start + n * 12]
            .chunks_exact(12)
            .map(|c| {
                let f = |k: usize| f32::from_le_bytes(c[k..k + 4].try_into().unwrap());
                Vec3::new(f(0), f(4), f(8))
            })
            .collect()
    };
    let positions = read_vecs(HEADER_LEN);
    let normals = read_vecs(HEADER_LEN + n * 12);
    let cov_start = HEADER_LEN + n * 24;
    let has_dilation = flags & FLAG_DILATION != 0;
    let coverage = bytes[cov_start..cov_start + n]
        .iter()
        .enumerate()
        .map(|(index, &value)| match value {
            0 => Ok(Coverage::Uncovered),
            1 => Ok(Coverage::Covered),
            2 if has_dilation => Ok(Coverage::Dilated),
            _ => Err(Lsm1Error::InvalidCoverage { index, value }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fp_start = cov_start + n;
    let fingerprint = u64::from_le_bytes(bytes[fp_start..fp_start + 8].try_into().unwrap());
    Ok(LocalSpaceMaps::from_parts(
        width,
        height,
        positions,
        normals,
        coverage,
        has_dilation,
        fingerprint,
    ))
}
