//! Gripper geometry and the JSON config file carrying it.

use super::TrialError;
use crate::catalog::Gripper;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// Geometric parameters of one gripper for the surrogate.
///
/// Hand frame convention: the palm plane is z = 0, fingers extend along
/// +z to `finger_depth_mm`, and closure happens along the x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperModel {
    pub gripper: Gripper,
    /// Parallel: stroke (max jaw opening). Underactuated: finger span
    /// (caging width).
    pub max_opening_mm: f64,
    pub finger_depth_mm: f64,
    pub friction_with_object: f64,
    /// Orientation deviation the gripper tolerates, in degrees. For the
    /// parallel gripper this is derived from the friction cone instead
    /// and the field is ignored.
    pub rotation_tolerance_deg: f64,
}

impl GripperModel {
    /// Franka-Hand-like two-jaw gripper.
    pub fn default_parallel() -> Self {
        Self {
            gripper: Gripper::Parallel,
            max_opening_mm: 80.0,
            finger_depth_mm: 30.0,
            friction_with_object: 0.4,
            rotation_tolerance_deg: 0.0,
        }
    }

    /// Tendon-driven underactuated hand; the wider working area shows up
    /// as a larger span and an explicit rotation tolerance.
    pub fn default_underactuated() -> Self {
        Self {
            gripper: Gripper::Underactuated,
            max_opening_mm: 140.0,
            finger_depth_mm: 70.0,
            friction_with_object: 0.6,
            rotation_tolerance_deg: 25.0,
        }
    }

    fn validate(&self) -> Result<(), String> {
        if self.max_opening_mm <= 0.0 || self.finger_depth_mm <= 0.0 {
            return Err("gripper geometric fields must be positive".into());
        }
        if self.friction_with_object <= 0.0 {
            return Err("friction_with_object must be positive".into());
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct ParallelEntry {
    stroke_mm: f64,
    finger_depth_mm: f64,
    friction_with_object: f64,
}

#[derive(Deserialize)]
struct UnderactuatedEntry {
    finger_span_mm: f64,
    finger_depth_mm: f64,
    friction_with_object: f64,
    rotation_tolerance_deg: f64,
}

#[derive(Deserialize)]
struct RawConfig {
    parallel: Option<ParallelEntry>,
    underactuated: Option<UnderactuatedEntry>,
}

/// Loads the gripper config JSON. Missing grippers fall back to the
/// documented defaults.
pub fn load_gripper_config(path: &Path) -> Result<BTreeMap<Gripper, GripperModel>, TrialError> {
    let bytes = std::fs::read(path).map_err(|e| {
        TrialError::ProtocolError {
            detail: format!("{}: {e}", path.display()),
        }
    })?;
    let raw: RawConfig = serde_json::from_slice(&bytes).map_err(|e| TrialError::ProtocolError {
        detail: format!("{}: {e}", path.display()),
    })?;
    let mut out = BTreeMap::new();
    let parallel = raw
        .parallel
        .map(|p| GripperModel {
            gripper: Gripper::Parallel,
            max_opening_mm: p.stroke_mm,
            finger_depth_mm: p.finger_depth_mm,
            friction_with_object: p.friction_with_object,
            rotation_tolerance_deg: 0.0,
        })
        .unwrap_or_else(GripperModel::default_parallel);
    let underactuated = raw
        .underactuated
        .map(|u| GripperModel {
            gripper: Gripper::Underactuated,
            max_opening_mm: u.finger_span_mm,
            finger_depth_mm: u.finger_depth_mm,
            friction_with_object: u.friction_with_object,
            rotation_tolerance_deg: u.rotation_tolerance_deg,
        })
        .unwrap_or_else(GripperModel::default_underactuated);
    for g in [parallel, underactuated] {
        g.validate().map_err(|detail| TrialError::ProtocolError {
            detail: format!("{}: {detail}", path.display()),
        })?;
        out.insert(g.gripper, g);
    }
    Ok(out)
}
