//! Physical-parameters sidecar. BOP metadata carry no masses or friction
//! coefficients, so they arrive through a separate JSON file:
//! `{ "<object_id>": {"mass_kg": 0.411, "friction": 0.6}, ... }`.
//! The values shipped under `assets/` are estimates, not measurements.

use super::BopError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PhysicalParams {
    pub mass_kg: f64,
    pub friction: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        // Used when an object is missing from the sidecar; a warning is
        // logged at load time.
        Self {
            mass_kg: 0.2,
            friction: 0.5,
        }
    }
}

pub fn load_physical_sidecar(path: &Path) -> Result<BTreeMap<u32, PhysicalParams>, BopError> {
    let bytes = std::fs::read(path).map_err(|e| BopError::io(path, e))?;
    let raw: BTreeMap<String, PhysicalParams> =
        serde_json::from_slice(&bytes).map_err(|e| BopError::parse(path, e.to_string()))?;
    let mut out = BTreeMap::new();
    for (key, params) in raw {
        let id: u32 = key
            .parse()
            .map_err(|_| BopError::parse(path, format!("non-integer object key '{key}'")))?;
        if params.mass_kg <= 0.0 || params.friction <= 0.0 {
            return Err(BopError::parse(
                path,
                format!("object {key}: mass_kg and friction must be positive"),
            ));
        }
        out.insert(id, params);
    }
    Ok(out)
}
