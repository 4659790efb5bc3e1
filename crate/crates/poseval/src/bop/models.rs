//! Object model loading: models_info.json metadata plus PLY meshes plus
//! the physical-parameters sidecar.

use super::ply::parse_ply_vertices;
use super::sidecar::PhysicalParams;
use super::{
    parse_mat3_row_major, subsample_vertices, BopError, ContinuousAxis, ObjectModel, SymmetrySpec,
    MAX_METRIC_VERTICES, MAX_ROTATION_DRIFT,
};
use crate::se3::RigidTransform;
use nalgebra::Vector3;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Deserialize)]
struct ModelInfoEntry {
    diameter: f64,
    #[serde(default)]
    symmetries_discrete: Vec<Vec<f64>>,
    #[serde(default)]
    symmetries_continuous: Vec<ContinuousEntry>,
}

#[derive(Deserialize)]
struct ContinuousEntry {
    axis: Vec<f64>,
    offset: Vec<f64>,
}

/// Loads every object listed in `<models_dir>/models_info.json`, reading
/// `obj_XXXXXX.ply` for each and attaching mass/friction from `sidecar`.
pub fn load_models(
    models_dir: &Path,
    sidecar: &BTreeMap<u32, PhysicalParams>,
) -> Result<BTreeMap<u32, ObjectModel>, BopError> {
    let info_path = models_dir.join("models_info.json");
    let bytes = std::fs::read(&info_path).map_err(|e| BopError::io(&info_path, e))?;
    let info: BTreeMap<String, ModelInfoEntry> =
        serde_json::from_slice(&bytes).map_err(|e| BopError::parse(&info_path, e.to_string()))?;

    let mut models = BTreeMap::new();
    for (key, entry) in info {
        let object_id: u32 = key
            .parse()
            .map_err(|_| BopError::parse(&info_path, format!("non-integer object key '{key}'")))?;
        if entry.diameter <= 0.0 {
            return Err(BopError::parse(
                &info_path,
                format!("object {key}: diameter must be positive"),
            ));
        }

        let mut discrete = Vec::new();
        for (i, mat) in entry.symmetries_discrete.iter().enumerate() {
            if mat.len() != 16 {
                return Err(BopError::parse(
                    &info_path,
                    format!(
                        "object {key}: symmetries_discrete[{i}] has {} values, expected 16",
                        mat.len()
                    ),
                ));
            }
            let r = parse_mat3_row_major(&[
                mat[0], mat[1], mat[2], mat[4], mat[5], mat[6], mat[8], mat[9], mat[10],
            ]);
            let t = Vector3::new(mat[3], mat[7], mat[11]);
            let s = RigidTransform::renormalized(r, t, MAX_ROTATION_DRIFT).map_err(|e| {
                BopError::parse(&info_path, format!("object {key}: symmetries_discrete[{i}]: {e}"))
            })?;
            discrete.push(s);
        }

        let mut continuous_axes = Vec::new();
        for (i, c) in entry.symmetries_continuous.iter().enumerate() {
            if c.axis.len() != 3 || c.offset.len() != 3 {
                return Err(BopError::parse(
                    &info_path,
                    format!("object {key}: symmetries_continuous[{i}] needs 3-vector axis and offset"),
                ));
            }
            let axis = ContinuousAxis::new(
                Vector3::new(c.axis[0], c.axis[1], c.axis[2]),
                Vector3::new(c.offset[0], c.offset[1], c.offset[2]),
            )
            .map_err(|e| {
                BopError::parse(&info_path, format!("object {key}: symmetries_continuous[{i}]: {e}"))
            })?;
            continuous_axes.push(axis);
        }

        let mesh_path = models_dir.join(format!("obj_{object_id:06}.ply"));
        if !mesh_path.exists() {
            return Err(BopError::UnknownObject(object_id));
        }
        let full_vertices = parse_ply_vertices(&mesh_path)?;

        sanity_check_diameter(object_id, entry.diameter, &full_vertices);

        let physical = sidecar.get(&object_id).copied().unwrap_or_default();
        models.insert(
            object_id,
            ObjectModel {
                object_id,
                full_vertex_count: full_vertices.len(),
                vertices: subsample_vertices(&full_vertices, MAX_METRIC_VERTICES),
                diameter: entry.diameter,
                symmetry: SymmetrySpec::new(discrete, continuous_axes),
                mass_kg: physical.mass_kg,
                friction_coefficient: physical.friction,
            },
        );
    }
    Ok(models)
}

/// Warn-only check that the declared diameter is at least the recomputed
/// max pairwise vertex distance. Exact up to 2000 vertices; above that a
/// support-point lower bound over 26 directions is used.
fn sanity_check_diameter(object_id: u32, diameter: f64, vertices: &[Vector3<f64>]) {
    let recomputed = max_pairwise_distance(vertices);
    if diameter < recomputed * (1.0 - 1e-6) {
        log::warn!(
            "object {object_id}: declared diameter {diameter:.3} mm < recomputed {recomputed:.3} mm"
        );
    }
}

pub(crate) fn max_pairwise_distance(vertices: &[Vector3<f64>]) -> f64 {
    let candidates: Vec<&Vector3<f64>> = if vertices.len() <= 2000 {
        vertices.iter().collect()
    } else {
        let mut dirs = Vec::new();
        for x in -1i32..=1 {
            for y in -1i32..=1 {
                for z in -1i32..=1 {
                    if (x, y, z) != (0, 0, 0) {
                        dirs.push(Vector3::new(x as f64, y as f64, z as f64));
                    }
                }
            }
        }
        dirs.iter()
            .map(|d| {
                vertices
                    .iter()
                    .max_by(|a, b| a.dot(d).total_cmp(&b.dot(d)))
                    .unwrap()
            })
            .collect()
    };
    let mut max = 0.0f64;
    for (i, a) in candidates.iter().enumerate() {
        for b in &candidates[i + 1..] {
            max = max.max((*a - *b).norm());
        }
    }
    max
}
