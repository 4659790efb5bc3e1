//! BOP dataset ingestion: scene ground truth, camera intrinsics, object
//! model metadata, PLY meshes, and BOP-format estimator result files.
//!
//! Only what the metric and trial pipeline needs is parsed: vertex
//! positions (faces, normals and color are skipped), diameters,
//! symmetries, poses, visibility fractions, intrinsics. Units follow BOP:
//! millimeters everywhere.

mod estimates;
mod matching;
mod models;
mod ply;
mod scene;
mod sidecar;

pub use estimates::{load_estimates, write_estimates};
pub use matching::{match_records, MatchReport, MatchedPair};
pub use models::load_models;
pub use ply::parse_ply_vertices;
pub use scene::{load_scene_cameras, load_scene_ground_truth};
pub use sidecar::{load_physical_sidecar, PhysicalParams};

use crate::se3::RigidTransform;
use nalgebra::Vector3;
use thiserror::Error;

/// Rotation matrices in result rows may drift this far from orthonormal
/// before the row is rejected instead of re-orthonormalized.
pub const MAX_ROTATION_DRIFT: f64 = 1e-3;

/// Meshes above this vertex count are deterministically stride-subsampled
/// for metric computation. MSSD/MSPD are max-statistics that converge
/// quickly on a dense subsample; BOP's own tooling subsamples too.
pub const MAX_METRIC_VERTICES: usize = 10_000;

#[derive(Debug, Error)]
pub enum BopError {
    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("{path}: no visibility entry for image {image_id}, instance {instance}")]
    MissingVisibility {
        path: String,
        image_id: u64,
        instance: usize,
    },
    #[error("object {0} referenced in models_info.json has no mesh file")]
    UnknownObject(u32),
    #[error("{0}: file is empty")]
    EmptyFile(String),
    #[error("duplicate estimates for scene {scene_id} image {image_id} object {object_id}")]
    DuplicateKey {
        scene_id: u64,
        image_id: u64,
        object_id: u32,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl BopError {
    pub(crate) fn parse(path: impl AsRef<std::path::Path>, detail: impl Into<String>) -> Self {
        BopError::Parse {
            path: path.as_ref().display().to_string(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        BopError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

/// One continuous symmetry: rotation about `axis` through `offset` leaves
/// the object's appearance unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousAxis {
    pub axis: Vector3<f64>,
    pub offset: Vector3<f64>,
}

impl ContinuousAxis {
    pub fn new(axis: Vector3<f64>, offset: Vector3<f64>) -> Result<Self, String> {
        let n = axis.norm();
        if n == 0.0 {
            return Err("symmetry axis has zero norm".into());
        }
        if (n - 1.0).abs() > 1e-9 {
            // Metadata axes are nominally unit; normalize small drift.
            return Ok(Self {
                axis: axis / n,
                offset,
            });
        }
        Ok(Self { axis, offset })
    }

    /// The rigid transform rotating by `angle_rad` about this axis.
    pub fn rotation(&self, angle_rad: f64) -> RigidTransform {
        let r = crate::se3::rotation_about_axis(&self.axis, angle_rad);
        let t = self.offset - r * self.offset;
        RigidTransform::new(r, t).expect("axis rotation is a rotation")
    }
}

/// An object's symmetry transforms from BOP metadata. The identity is
/// always present in the effective discrete set.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrySpec {
    pub discrete: Vec<RigidTransform>,
    pub continuous_axes: Vec<ContinuousAxis>,
}

impl SymmetrySpec {
    /// Trivial symmetry: identity only.
    pub fn trivial() -> Self {
        Self {
            discrete: vec![RigidTransform::identity()],
            continuous_axes: Vec::new(),
        }
    }

    /// Builds a spec, prepending the identity if the metadata (which lists
    /// only non-identity elements) omits it.
    pub fn new(discrete: Vec<RigidTransform>, continuous_axes: Vec<ContinuousAxis>) -> Self {
        let mut all = Vec::with_capacity(discrete.len() + 1);
        let id = RigidTransform::identity();
        let has_identity = discrete.iter().any(|t| {
            let (dr, dt) = t.distance_to(&id);
            dr < 1e-9 && dt < 1e-9
        });
        if !has_identity {
            all.push(id);
        }
        all.extend(discrete);
        Self {
            discrete: all,
            continuous_axes,
        }
    }

    /// True when the object has no symmetry beyond the identity.
    pub fn is_trivial(&self) -> bool {
        self.discrete.len() == 1 && self.continuous_axes.is_empty()
    }
}

/// Mesh, diameter, symmetry, and assigned physical parameters for one
/// object.
#[derive(Debug, Clone)]
pub struct ObjectModel {
    pub object_id: u32,
    /// Vertex positions (mm), subsampled to [`MAX_METRIC_VERTICES`].
    pub vertices: Vec<Vector3<f64>>,
    /// Vertex count of the mesh before subsampling.
    pub full_vertex_count: usize,
    pub diameter: f64,
    pub symmetry: SymmetrySpec,
    pub mass_kg: f64,
    pub friction_coefficient: f64,
}

impl ObjectModel {
    /// Mean of the (subsampled) vertex set.
    pub fn centroid(&self) -> Vector3<f64> {
        self.vertices.iter().sum::<Vector3<f64>>() / self.vertices.len() as f64
    }
}

/// One ground-truth annotation for a (scene, image, object instance).
#[derive(Debug, Clone)]
pub struct GroundTruthRecord {
    pub scene_id: u64,
    pub image_id: u64,
    pub object_id: u32,
    pub pose: RigidTransform,
    pub visibility: f64,
}

/// One estimator prediction row from a BOP result file.
#[derive(Debug, Clone)]
pub struct EstimateRecord {
    pub scene_id: u64,
    pub image_id: u64,
    pub object_id: u32,
    pub score: f64,
    pub pose: RigidTransform,
    pub inference_time: f64,
}

pub(crate) fn parse_mat3_row_major(v: &[f64]) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8])
}

/// Deterministic, seed-free stride subsampling of a vertex set.
pub(crate) fn subsample_vertices(vertices: &[Vector3<f64>], cap: usize) -> Vec<Vector3<f64>> {
    if vertices.len() <= cap {
        return vertices.to_vec();
    }
    let stride = vertices.len().div_ceil(cap);
    vertices.iter().step_by(stride).copied().collect()
}
