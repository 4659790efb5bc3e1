//! Built-in deterministic grasp-outcome model.
//!
//! The surrogate is quasi-static: it reasons about contact geometry at
//! the perturbed grasp pose instead of integrating dynamics. The hand
//! frame convention is: palm plane at z = 0, fingers extending along +z
//! to `finger_depth_mm`, closure along the x axis.

use super::{FailureStage, GripperModel, Outcome, OutcomeModel, TrialError, TrialSpec};
use crate::bop::ObjectModel;
use crate::catalog::Gripper;
use crate::metrics::rotation_error_deg;
use crate::se3::RigidTransform;
use nalgebra::{Matrix3, Vector3};
use std::collections::HashMap;
use std::sync::RwLock;

/// Vertex budget for contact reasoning; meshes are subsampled past this.
const MAX_SURROGATE_VERTICES: usize = 3_000;
/// Neighborhood size for plane-fit normal estimation.
const NORMAL_NEIGHBORS: usize = 12;

/// Per-object geometry prepared once and reused across trials.
struct ObjectGeometry {
    /// Object-frame vertex positions (mm).
    vertices: Vec<Vector3<f64>>,
    /// Outward unit normals estimated per vertex.
    normals: Vec<Vector3<f64>>,
    /// Mean vertex position (object frame).
    centroid: Vector3<f64>,
}

/// Deterministic geometric grasp-outcome model.
///
/// For a parallel-jaw gripper the stages are: palm collision, finger
/// slab occupancy and stroke fit, antipodal friction-cone pair,
/// symmetry-aware orientation within the friction angle, contact-centroid
/// drift within the finger depth. For an underactuated hand: palm
/// collision, centroid caging inside the finger span, symmetry-aware
/// orientation within the hand's rotation tolerance. Either way the final
/// verdict compares the hand-base-to-centroid distance against the
/// reference target within `tolerance_mm`.
pub struct SurrogateOutcome {
    tolerance_mm: f64,
    cache: RwLock<HashMap<u32, ObjectGeometry>>,
}

impl SurrogateOutcome {
    pub fn new(tolerance_mm: f64) -> Self {
        Self {
            tolerance_mm,
            cache: RwLock::new(HashMap::new()),
        }
    }

    fn with_geometry<T>(
        &self,
        object: &ObjectModel,
        f: impl FnOnce(&ObjectGeometry) -> T,
    ) -> Result<T, TrialError> {
        {
            let cache = self.cache.read().expect("geometry cache poisoned");
            if let Some(geom) = cache.get(&object.object_id) {
                return Ok(f(geom));
            }
        }
        let geom = ObjectGeometry::build(object)?;
        let mut cache = self.cache.write().expect("geometry cache poisoned");
        Ok(f(cache.entry(object.object_id).or_insert(geom)))
    }
}

impl Default for SurrogateOutcome {
    fn default() -> Self {
        Self::new(super::DEFAULT_TOLERANCE_MM)
    }
}

impl ObjectGeometry {
    fn build(object: &ObjectModel) -> Result<Self, TrialError> {
        let vertices = subsample(&object.vertices, MAX_SURROGATE_VERTICES);
        if !has_rank_three(&vertices) {
            return Err(TrialError::DegenerateMesh {
                object_id: object.object_id,
            });
        }
        let centroid = vertices.iter().sum::<Vector3<f64>>() / vertices.len() as f64;
        let normals = estimate_normals(&vertices, centroid);
        Ok(Self {
            vertices,
            normals,
            centroid,
        })
    }
}

fn subsample(vertices: &[Vector3<f64>], cap: usize) -> Vec<Vector3<f64>> {
    if vertices.len() <= cap {
        return vertices.to_vec();
    }
    let stride = vertices.len().div_ceil(cap);
    vertices.iter().step_by(stride).copied().collect()
}

/// True when the point set spans all three dimensions (contact normals
/// are meaningless for a segment or a flat sheet of points).
fn has_rank_three(vertices: &[Vector3<f64>]) -> bool {
    if vertices.len() < 4 {
        return false;
    }
    let mean = vertices.iter().sum::<Vector3<f64>>() / vertices.len() as f64;
    let mut cov = Matrix3::zeros();
    let mut scale: f64 = 0.0;
    for v in vertices {
        let d = v - mean;
        cov += d * d.transpose();
        scale = scale.max(d.norm_squared());
    }
    if scale == 0.0 {
        return false;
    }
    let eig = cov.symmetric_eigenvalues();
    eig.iter().all(|&l| l > 1e-9 * scale)
}

/// Plane-fit normals from the nearest-neighbor neighborhood of each
/// vertex, oriented away from the centroid.
fn estimate_normals(vertices: &[Vector3<f64>], centroid: Vector3<f64>) -> Vec<Vector3<f64>> {
    let k = NORMAL_NEIGHBORS.min(vertices.len() - 1);
    let mut normals = Vec::with_capacity(vertices.len());
    let mut dist = vec![(0.0f64, 0usize); vertices.len()];
    for v in vertices.iter() {
        for (j, w) in vertices.iter().enumerate() {
            dist[j] = ((v - w).norm_squared(), j);
        }
        dist.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0));
        let neighborhood: Vec<Vector3<f64>> =
            dist[..=k].iter().map(|&(_, j)| vertices[j]).collect();
        let mean = neighborhood.iter().sum::<Vector3<f64>>() / neighborhood.len() as f64;
        let mut cov = Matrix3::zeros();
        for p in &neighborhood {
            let d = p - mean;
            cov += d * d.transpose();
        }
        let eig = cov.symmetric_eigen();
        // Smallest-eigenvalue eigenvector is the plane normal.
        let mut min_idx = 0;
        for c in 1..3 {
            if eig.eigenvalues[c] < eig.eigenvalues[min_idx] {
                min_idx = c;
            }
        }
        let mut n: Vector3<f64> = eig.eigenvectors.column(min_idx).into();
        let outward = v - centroid;
        if n.dot(&outward) < 0.0 {
            n = -n;
        }
        normals.push(n.normalize());
    }
    normals
}

/// Angle (rad) between a unit direction and a normal.
fn cone_angle(normal: &Vector3<f64>, direction: &Vector3<f64>) -> f64 {
    normal.dot(direction).clamp(-1.0, 1.0).acos()
}

impl OutcomeModel for SurrogateOutcome {
    fn evaluate(&self, spec: &TrialSpec, gripper: &GripperModel) -> Result<Outcome, TrialError> {
        let tolerance_mm = self.tolerance_mm;
        self.with_geometry(spec.object, |geom| {
            evaluate_stages(spec, gripper, geom, tolerance_mm)
        })
    }
}

fn evaluate_stages(
    spec: &TrialSpec,
    gripper: &GripperModel,
    geom: &ObjectGeometry,
    tolerance_mm: f64,
) -> Outcome {
    // Object pose expressed in the (perturbed) hand frame, and in the
    // reference hand frame for side-by-side contact comparison.
    let obj_in_plan = spec.plan.inverse().compose(&spec.object_pose_sim);
    let obj_in_ref = spec
        .grasp
        .hand_pose_ref
        .inverse()
        .compose(&spec.object_pose_sim);

    let centroid_in_plan = obj_in_plan.apply(&geom.centroid);
    let final_distance_mm = centroid_in_plan.norm();
    let fail = |stage| Outcome {
        success: false,
        failure_stage: stage,
        final_distance_mm,
    };

    // Stage 0: approach standoff must already be collision-free.
    let standoff = spec
        .plan
        .compose(&RigidTransform::from_translation(spec.grasp.approach_offset));
    let obj_in_standoff = standoff.inverse().compose(&spec.object_pose_sim);
    if palm_penetrated(geom, &obj_in_standoff) {
        return fail(FailureStage::PreGraspCollision);
    }
    // Stage I: the grasp pose itself must keep the object off the palm.
    if palm_penetrated(geom, &obj_in_plan) {
        return fail(FailureStage::PreGraspCollision);
    }

    // Stage II: closure.
    let orientation_dev_deg = rotation_error_deg(&obj_in_plan, &obj_in_ref, &spec.object.symmetry);
    match gripper.gripper {
        Gripper::Parallel => {
            let half_stroke = gripper.max_opening_mm / 2.0;
            let depth = gripper.finger_depth_mm;
            // Vertices inside the closure slab between the fingertips.
            let slab: Vec<usize> = (0..geom.vertices.len())
                .filter(|&i| {
                    let p = obj_in_plan.apply(&geom.vertices[i]);
                    p.z >= 0.0 && p.z <= depth && p.y.abs() <= depth
                })
                .collect();
            if slab.is_empty() {
                return fail(FailureStage::NoClosure);
            }
            let max_x = slab
                .iter()
                .map(|&i| obj_in_plan.apply(&geom.vertices[i]).x.abs())
                .fold(0.0f64, f64::max);
            if max_x > half_stroke {
                return fail(FailureStage::NoClosure);
            }
            let mu = gripper
                .friction_with_object
                .min(spec.object.friction_coefficient);
            let cone = mu.atan();
            // Antipodal pair test: a contact candidate on each side whose
            // outward normal points into the opposing finger within the
            // friction cone.
            let mut contacts = Vec::new();
            let (mut left_ok, mut right_ok) = (false, false);
            for &i in &slab {
                let p = obj_in_plan.apply(&geom.vertices[i]);
                let n = obj_in_plan.rotation() * geom.normals[i];
                let to_left = cone_angle(&n, &Vector3::new(-1.0, 0.0, 0.0)) <= cone;
                let to_right = cone_angle(&n, &Vector3::new(1.0, 0.0, 0.0)) <= cone;
                if p.x <= 0.0 && to_left {
                    left_ok = true;
                    contacts.push(p);
                } else if p.x >= 0.0 && to_right {
                    right_ok = true;
                    contacts.push(p);
                }
            }
            if !(left_ok && right_ok) || orientation_dev_deg > cone.to_degrees() {
                return fail(FailureStage::SlipOrEject);
            }
            // Contact placement must stay close to the reference grasp's.
            let actual = contacts.iter().sum::<Vector3<f64>>() / contacts.len() as f64;
            let reference = reference_contact_centroid(geom, &obj_in_ref, gripper, mu);
            if (actual - reference).norm() > depth {
                return fail(FailureStage::ToleranceExceeded);
            }
        }
        Gripper::Underactuated => {
            let half_span = gripper.max_opening_mm / 2.0;
            let caged = centroid_in_plan.x.abs() <= half_span
                && centroid_in_plan.y.abs() <= half_span
                && centroid_in_plan.z >= 0.0
                && centroid_in_plan.z <= gripper.finger_depth_mm;
            if !caged {
                return fail(FailureStage::NoClosure);
            }
            if orientation_dev_deg > gripper.rotation_tolerance_deg {
                return fail(FailureStage::SlipOrEject);
            }
        }
    }

    // Stage III + hold: lift is rigid under the quasi-static model, so
    // the verdict is the hand-base-to-centroid distance criterion.
    if (final_distance_mm - spec.grasp.target_hand_object_distance).abs() > tolerance_mm {
        return fail(FailureStage::ToleranceExceeded);
    }
    Outcome {
        success: true,
        failure_stage: FailureStage::None,
        final_distance_mm,
    }
}

/// Any vertex behind the palm plane counts as penetration.
fn palm_penetrated(geom: &ObjectGeometry, obj_in_hand: &RigidTransform) -> bool {
    geom.vertices
        .iter()
        .any(|v| obj_in_hand.apply(v).z < -1e-9)
}

/// Contact centroid of the same antipodal test run at the reference pose.
fn reference_contact_centroid(
    geom: &ObjectGeometry,
    obj_in_ref: &RigidTransform,
    gripper: &GripperModel,
    mu: f64,
) -> Vector3<f64> {
    let depth = gripper.finger_depth_mm;
    let cone = mu.atan();
    let mut sum = Vector3::zeros();
    let mut count = 0usize;
    for (v, n_obj) in geom.vertices.iter().zip(&geom.normals) {
        let p = obj_in_ref.apply(v);
        if p.z < 0.0 || p.z > depth || p.y.abs() > depth {
            continue;
        }
        let n = obj_in_ref.rotation() * n_obj;
        let to_left = cone_angle(&n, &Vector3::new(-1.0, 0.0, 0.0)) <= cone;
        let to_right = cone_angle(&n, &Vector3::new(1.0, 0.0, 0.0)) <= cone;
        if (p.x <= 0.0 && to_left) || (p.x >= 0.0 && to_right) {
            sum += p;
            count += 1;
        }
    }
    if count == 0 {
        // A catalog grasp with no reference contacts would itself be
        // invalid; fall back to the object centroid position.
        obj_in_ref.apply(&geom.centroid)
    } else {
        sum / count as f64
    }
}
