use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use decalpaint_service::StampRequest;
use serde::{Deserialize, Serialize};

/// A stamp script: named decal images plus stamps applied in order.
///
/// ```json
/// {
///   "decals": {"logo": "logo.png"},
///   "stamps": [{"position": [0.5, 0.5, 1], "orientation": [0, 0, 0, 1],
///               "scale": [0.5, 0.5, 2], "decal_id": "logo"}]
/// }
/// ```
///
/// Decal paths are resolved relative to the script's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StampScript {
    #[serde(default)]
    pub decals: BTreeMap<String, PathBuf>,
    pub stamps: Vec<StampRequest>,
}

impl StampScript {
    pub fn parse(text: &str) -> Result<Self, String> {
        let script: Self =
            serde_json::from_str(text).map_err(|e| format!("invalid script: {e}"))?;
        if script.stamps.is_empty() {
            return Err("invalid script: no stamps".into());
        }
        for (i, s) in script.stamps.iter().enumerate() {
            if !script.decals.contains_key(&s.decal_id) {
                return Err(format!(
                    "invalid script: stamp {i} references unknown decal {:?}",
                    s.decal_id
                ));
            }
            s.scale_vec()
                .map_err(|e| format!("invalid script: stamp {i}: {e}"))?;
            s.options
                .validate()
                .map_err(|e| format!("invalid script: stamp {i}: {e}"))?;
        }
        Ok(script)
    }

    pub fn decal_path(&self, base: &Path, name: &str) -> PathBuf {
        base.join(&self.decals[name])
    }
}
