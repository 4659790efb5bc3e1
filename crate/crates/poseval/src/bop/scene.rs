//! Scene-level BOP files: scene_gt.json, scene_gt_info.json,
//! scene_camera.json.

use super::{parse_mat3_row_major, BopError, GroundTruthRecord};
use crate::se3::{CameraIntrinsics, RigidTransform};
use nalgebra::Vector3;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Deserialize)]
struct GtEntry {
    #[serde(rename = "cam_R_m2c")]
    cam_r_m2c: Vec<f64>,
    cam_t_m2c: Vec<f64>,
    obj_id: u32,
}

#[derive(Deserialize)]
struct GtInfoEntry {
    #[serde(default = "default_visibility")]
    visib_fract: f64,
}

fn default_visibility() -> f64 {
    f64::NAN
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, BopError> {
    let bytes = std::fs::read(path).map_err(|e| BopError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| BopError::parse(path, e.to_string()))
}

/// Loads all annotations of one BOP scene directory. `scene_id` is taken
/// from the directory name (e.g. `000002`).
pub fn load_scene_ground_truth(scene_dir: &Path) -> Result<Vec<GroundTruthRecord>, BopError> {
    let scene_id = scene_dir
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.parse::<u64>().ok())
        .unwrap_or(0);
    let gt_path = scene_dir.join("scene_gt.json");
    let info_path = scene_dir.join("scene_gt_info.json");

    let gt: BTreeMap<String, Vec<GtEntry>> = read_json(&gt_path)?;
    let info: BTreeMap<String, Vec<GtInfoEntry>> = read_json(&info_path)?;

    let mut records = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (image_key, entries) in &gt {
        let image_id: u64 = image_key
            .parse()
            .map_err(|_| BopError::parse(&gt_path, format!("non-integer image key '{image_key}'")))?;
        let image_info = info.get(image_key);
        for (instance, entry) in entries.iter().enumerate() {
            if entry.cam_r_m2c.len() != 9 {
                return Err(BopError::parse(
                    &gt_path,
                    format!(
                        "image {image_key} instance {instance}: cam_R_m2c has {} values, expected 9",
                        entry.cam_r_m2c.len()
                    ),
                ));
            }
            if entry.cam_t_m2c.len() != 3 {
                return Err(BopError::parse(
                    &gt_path,
                    format!(
                        "image {image_key} instance {instance}: cam_t_m2c has {} values, expected 3",
                        entry.cam_t_m2c.len()
                    ),
                ));
            }
            let visibility = image_info
                .and_then(|v| v.get(instance))
                .map(|e| e.visib_fract)
                .ok_or(BopError::MissingVisibility {
                    path: info_path.display().to_string(),
                    image_id,
                    instance,
                })?;
            if visibility.is_nan() || !(0.0..=1.0).contains(&visibility) {
                return Err(BopError::parse(
                    &info_path,
                    format!("image {image_key} instance {instance}: visib_fract out of [0,1]"),
                ));
            }
            let rotation = parse_mat3_row_major(&entry.cam_r_m2c);
            let translation = Vector3::new(entry.cam_t_m2c[0], entry.cam_t_m2c[1], entry.cam_t_m2c[2]);
            let pose = RigidTransform::renormalized(rotation, translation, super::MAX_ROTATION_DRIFT)
                .map_err(|e| {
                    BopError::parse(&gt_path, format!("image {image_key} instance {instance}: {e}"))
                })?;
            // Single-instance convention: one annotation per object per image.
            if !seen.insert((image_id, entry.obj_id)) {
                return Err(BopError::DuplicateKey {
                    scene_id,
                    image_id,
                    object_id: entry.obj_id,
                });
            }
            records.push(GroundTruthRecord {
                scene_id,
                image_id,
                object_id: entry.obj_id,
                pose,
                visibility,
            });
        }
    }
    Ok(records)
}

#[derive(Deserialize)]
struct CameraEntry {
    #[serde(rename = "cam_K")]
    cam_k: Vec<f64>,
}

/// Per-image camera intrinsics from scene_camera.json.
pub fn load_scene_cameras(scene_dir: &Path) -> Result<BTreeMap<u64, CameraIntrinsics>, BopError> {
    let path = scene_dir.join("scene_camera.json");
    let raw: BTreeMap<String, CameraEntry> = read_json(&path)?;
    let mut cameras = BTreeMap::new();
    for (image_key, entry) in raw {
        let image_id: u64 = image_key
            .parse()
            .map_err(|_| BopError::parse(&path, format!("non-integer image key '{image_key}'")))?;
        if entry.cam_k.len() != 9 {
            return Err(BopError::parse(
                &path,
                format!("image {image_key}: cam_K has {} values, expected 9", entry.cam_k.len()),
            ));
        }
        let k: [f64; 9] = entry.cam_k.try_into().unwrap();
        let intrinsics = CameraIntrinsics::from_k_row_major(&k)
            .map_err(|e| BopError::parse(&path, format!("image {image_key}: {e}")))?;
        cameras.insert(image_id, intrinsics);
    }
    Ok(cameras)
}
