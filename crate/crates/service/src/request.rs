use std::sync::Arc;

use decalpaint_core::{DecalProjector, ProjectorError, StampOptions, Texture};
use glam::{Quat, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RequestError {
    #[error("scale must have 2 or 3 components, got {0}")]
    ScaleArity(usize),
    #[error(transparent)]
    Projector(#[from] ProjectorError),
}

/// One stamp as it travels over HTTP or sits in a CLI script.
///
/// `orientation` is `[x, y, z, w]`. A two-component `scale` gives the decal
/// half-width and half-height; the half-depth then defaults to the smaller of
/// the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StampRequest {
    pub position: [f32; 3],
    pub orientation: [f32; 4],
    pub scale: Vec<f32>,
    pub decal_id: String,
    #[serde(flatten)]
    pub options: StampOptions,
}

impl StampRequest {
    pub fn scale_vec(&self) -> Result<Vec3, RequestError> {
        match *self.scale.as_slice() {
            [x, y] => Ok(Vec3::new(x, y, x.min(y))),
            [x, y, z] => Ok(Vec3::new(x, y, z)),
            _ => Err(RequestError::ScaleArity(self.scale.len())),
        }
    }

    pub fn projector(&self, decal: Arc<Texture>) -> Result<DecalProjector, RequestError> {
        let scale = self.scale_vec()?;
        Ok(DecalProjector::new(
            Vec3::from_array(self.position),
            Quat::from_array(self.orientation),
            scale,
            decal,
        )?)
    }
}
