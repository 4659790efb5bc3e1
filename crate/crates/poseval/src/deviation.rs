//! Transfer of an estimate's pose deviation onto a reference grasp plan:
//! express the deviation in the dataset world, conjugate it into the
//! object's ground-truth frame and then into the simulator world, and
//! left-compose it onto the reference hand pose.

use crate::catalog::ReferenceGrasp;
use crate::se3::RigidTransform;
use nalgebra::Vector3;

/// The estimate's deviation from ground truth in the shared dataset
/// world: `delta = est * gt^-1`. `deviation_in_world(gt, gt)` is the
/// identity.
pub fn deviation_in_world(est: &RigidTransform, gt: &RigidTransform) -> RigidTransform {
    est.compose(&gt.inverse())
}

/// Rewrites a world-frame deviation into the simulator world: first into
/// the object's ground-truth frame (`gt^-1 * delta * gt`), then out
/// through the object's simulator pose (`sim * delta_obj * sim^-1`).
/// Identity maps to identity.
pub fn deviation_to_sim(
    delta_world: &RigidTransform,
    gt_world: &RigidTransform,
    object_pose_sim: &RigidTransform,
) -> RigidTransform {
    let delta_obj = gt_world
        .inverse()
        .compose(delta_world)
        .compose(gt_world);
    object_pose_sim
        .compose(&delta_obj)
        .compose(&object_pose_sim.inverse())
}

/// The executed plan: the simulator-world deviation applied to the
/// reference hand pose. With an identity deviation the plan equals the
/// reference grasp exactly.
pub fn perturbed_plan(delta_sim: &RigidTransform, grasp: &ReferenceGrasp) -> RigidTransform {
    delta_sim.compose(&grasp.hand_pose_ref)
}

/// Placement of the object in the simulator world: isolated, resting on
/// the z = 0 support plane.
#[derive(Debug, Clone, Copy)]
pub struct SimWorldConvention {
    pub object_pose_sim: RigidTransform,
}

impl SimWorldConvention {
    /// Canonical rest pose: identity rotation, centroid over the origin,
    /// mesh translated so its lowest vertex touches the support plane.
    /// Deterministic per object, so the shipped grasp catalog can state
    /// hand poses directly in simulator-world coordinates.
    pub fn rest_pose(vertices: &[Vector3<f64>]) -> Self {
        let centroid = vertices.iter().sum::<Vector3<f64>>() / vertices.len() as f64;
        let min_z = vertices.iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
        Self {
            object_pose_sim: RigidTransform::from_translation(Vector3::new(
                -centroid.x,
                -centroid.y,
                -min_z,
            )),
        }
    }

    /// Checks the support-plane invariant: no transformed vertex below
    /// z = -1e-6.
    pub fn validate(&self, vertices: &[Vector3<f64>]) -> Result<(), f64> {
        let min_z = vertices
            .iter()
            .map(|v| self.object_pose_sim.apply(v).z)
            .fold(f64::INFINITY, f64::min);
        if min_z >= -1e-6 {
            Ok(())
        } else {
            Err(min_z)
        }
    }
}
