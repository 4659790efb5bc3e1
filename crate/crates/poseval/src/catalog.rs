//! Reference-grasp catalog: handcrafted grasp plans are data, not code.
//! The JSON schema stores one entry per (object, gripper, grasp_index)
//! with the hand pose in simulator-world coordinates for the object's
//! canonical rest pose.

use crate::se3::RigidTransform;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gripper {
    Parallel,
    Underactuated,
}

impl Gripper {
    pub fn name(&self) -> &'static str {
        match self {
            Gripper::Parallel => "parallel",
            Gripper::Underactuated => "underactuated",
        }
    }
}

impl std::str::FromStr for Gripper {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parallel" => Ok(Gripper::Parallel),
            "underactuated" => Ok(Gripper::Underactuated),
            other => Err(format!("unknown gripper '{other}'")),
        }
    }
}

/// The Stage-I pre-grasp hand pose plus open-loop policy parameters for
/// one object-gripper pair.
#[derive(Debug, Clone)]
pub struct ReferenceGrasp {
    pub object_id: u32,
    pub gripper: Gripper,
    pub grasp_index: u32,
    /// Hand frame {H} in the simulator world (mm). The hand's +z axis is
    /// the approach direction; fingers close along the hand's x axis.
    pub hand_pose_ref: RigidTransform,
    /// Stage-0 standoff, expressed in the hand frame (mm).
    pub approach_offset: Vector3<f64>,
    /// Stage-III target elevation (mm).
    pub lift_height: f64,
    /// Hand-base-to-object-centroid distance whose tolerance defines
    /// success (mm).
    pub target_hand_object_distance: f64,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Serialize, Deserialize)]
struct RawGrasp {
    object_id: u32,
    gripper: Gripper,
    grasp_index: u32,
    /// Row-major 9-float rotation.
    hand_rotation: Vec<f64>,
    hand_translation: Vec<f64>,
    approach_offset: Vec<f64>,
    lift_height: f64,
    target_hand_object_distance: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCatalog {
    grasps: Vec<RawGrasp>,
}

/// All reference grasps of one dataset.
#[derive(Debug, Clone, Default)]
pub struct GraspCatalog {
    pub grasps: Vec<ReferenceGrasp>,
}

impl GraspCatalog {
    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let parse_err = |detail: String| CatalogError::Parse {
            path: path.display().to_string(),
            detail,
        };
        let bytes = std::fs::read(path).map_err(|e| CatalogError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let raw: RawCatalog =
            serde_json::from_slice(&bytes).map_err(|e| parse_err(e.to_string()))?;
        let mut grasps = Vec::with_capacity(raw.grasps.len());
        for (i, g) in raw.grasps.iter().enumerate() {
            let ctx = |d: String| parse_err(format!("grasps[{i}]: {d}"));
            if g.hand_rotation.len() != 9 {
                return Err(ctx(format!("hand_rotation has {} values, expected 9", g.hand_rotation.len())));
            }
            if g.hand_translation.len() != 3 || g.approach_offset.len() != 3 {
                return Err(ctx("hand_translation and approach_offset need 3 values".into()));
            }
            if g.lift_height <= 0.0 || g.target_hand_object_distance <= 0.0 {
                return Err(ctx("lift_height and target_hand_object_distance must be positive".into()));
            }
            let r = nalgebra::Matrix3::new(
                g.hand_rotation[0], g.hand_rotation[1], g.hand_rotation[2],
                g.hand_rotation[3], g.hand_rotation[4], g.hand_rotation[5],
                g.hand_rotation[6], g.hand_rotation[7], g.hand_rotation[8],
            );
            let t = Vector3::new(g.hand_translation[0], g.hand_translation[1], g.hand_translation[2]);
            let hand_pose_ref = RigidTransform::renormalized(r, t, 1e-6)
                .map_err(|e| ctx(e.to_string()))?;
            grasps.push(ReferenceGrasp {
                object_id: g.object_id,
                gripper: g.gripper,
                grasp_index: g.grasp_index,
                hand_pose_ref,
                approach_offset: Vector3::new(
                    g.approach_offset[0],
                    g.approach_offset[1],
                    g.approach_offset[2],
                ),
                lift_height: g.lift_height,
                target_hand_object_distance: g.target_hand_object_distance,
            });
        }
        Ok(Self { grasps })
    }

    pub fn save(&self, path: &Path) -> Result<(), CatalogError> {
        let raw = RawCatalog {
            grasps: self
                .grasps
                .iter()
                .map(|g| {
                    let r = g.hand_pose_ref.rotation();
                    RawGrasp {
                        object_id: g.object_id,
                        gripper: g.gripper,
                        grasp_index: g.grasp_index,
                        hand_rotation: (0..3)
                            .flat_map(|i| (0..3).map(move |j| r[(i, j)]))
                            .collect(),
                        hand_translation: g.hand_pose_ref.translation().iter().copied().collect(),
                        approach_offset: g.approach_offset.iter().copied().collect(),
                        lift_height: g.lift_height,
                        target_hand_object_distance: g.target_hand_object_distance,
                    }
                })
                .collect(),
        };
        let json = serde_json::to_string_pretty(&raw).expect("catalog serializes");
        std::fs::write(path, json).map_err(|e| CatalogError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    /// Grasp lookup; `None` means the combination is not applicable
    /// (e.g. no parallel grasp exists for the egg box).
    pub fn find(&self, object_id: u32, gripper: Gripper, grasp_index: u32) -> Option<&ReferenceGrasp> {
        self.grasps.iter().find(|g| {
            g.object_id == object_id && g.gripper == gripper && g.grasp_index == grasp_index
        })
    }

    /// All (object, gripper) combinations present in the catalog.
    pub fn entries(&self) -> impl Iterator<Item = &ReferenceGrasp> {
        self.grasps.iter()
    }
}
