//! Rigid-transform algebra, rotation geometry, and pinhole projection.
//!
//! Everything downstream (metrics, deviation transfer, grasp trials) is
//! phrased in terms of [`RigidTransform`]. Rotations are stored as 3x3
//! matrices because BOP files encode row-major 9-float rotation matrices;
//! translations are millimeters, angles are degrees.

use nalgebra::{Matrix3, Vector2, Vector3};
use thiserror::Error;

/// Tolerance for the orthonormality check at construction time.
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("rotation matrix drifts {drift:.3e} from orthonormality (tolerance {tol:.1e})")]
    NotARotation { drift: f64, tol: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("point has non-positive depth z = {z}")]
    NonPositiveDepth { z: f64 },
}

/// An SE(3) element: orthonormal rotation (det +1) plus translation in mm.
///
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

/// Frobenius-norm distance of `r` from the orthonormal det-+1 manifold,
/// measured as ||R^T R - I||_F + |det(R) - 1|.
pub fn rotation_drift(r: &Matrix3<f64>) -> f64 {
    let gram = r.transpose() * r;
    let mut drift = (gram - Matrix3::identity()).norm();
    drift += (r.determinant() - 1.0).abs();
    drift
}

impl RigidTransform {
    /// Builds a transform, verifying the rotation to [`ROTATION_TOL`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, TransformError> {
        let drift = rotation_drift(&rotation);
        if drift > ROTATION_TOL {
            return Err(TransformError::NotARotation {
                drift,
                tol: ROTATION_TOL,
            });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds a transform from a possibly drifted rotation, projecting it
    /// to the nearest rotation via SVD. Rejects inputs whose drift exceeds
    /// `max_drift` (BOP result rows use 1e-3).
    pub fn renormalized(
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        max_drift: f64,
    ) -> Result<Self, TransformError> {
        let drift = rotation_drift(&rotation);
        if drift > max_drift {
            return Err(TransformError::NotARotation {
                drift,
                tol: max_drift,
            });
        }
        // Already a rotation to working precision: keep the exact bits so
        // that parse -> serialize -> parse is the identity.
        if drift <= ROTATION_TOL && rotation.determinant() > 0.0 {
            return Self::new(rotation, translation);
        }
        let svd = rotation.svd(true, true);
        let u = svd.u.expect("svd u");
        let vt = svd.v_t.expect("svd v_t");
        let mut r = u * vt;
        // Force det +1 by flipping the least-significant singular direction.
        if r.determinant() < 0.0 {
            let mut u_fixed = u;
            u_fixed.column_mut(2).neg_mut();
            r = u_fixed * vt;
        }
        Self::new(r, translation)
    }

    /// Internal constructor for results of group operations on already
    /// validated elements; drift checked only in debug builds.
    fn new_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        debug_assert!(rotation_drift(&rotation) < 1e-6);
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new_unchecked(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_rotation(rotation: Matrix3<f64>) -> Result<Self, TransformError> {
        Self::new(rotation, Vector3::zeros())
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self::new_unchecked(Matrix3::identity(), translation)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// `self` after `other`: the homogeneous product self * other.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new_unchecked(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new_unchecked(rt, -(rt * self.translation))
    }

    /// Applies the transform to a point (mm).
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Frobenius rotation distance plus Euclidean translation distance to
    /// another transform. Convenience for identity/closeness assertions.
    pub fn distance_to(&self, other: &Self) -> (f64, f64) {
        (
            (self.rotation - other.rotation).norm(),
            (self.translation - other.translation).norm(),
        )
    }
}

/// Geodesic angle between two rotations in degrees:
/// arccos((trace(r1 r2^T) - 1) / 2), clamped into [-1, 1] before arccos
/// since floating-point traces can exceed the domain by ~1e-15.
pub fn geodesic_angle_deg(r1: &Matrix3<f64>, r2: &Matrix3<f64>) -> f64 {
    let cos = ((r1 * r2.transpose()).trace() - 1.0) / 2.0;
    cos.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Pinhole intrinsics in pixels. No distortion model; BOP test images are
/// rectified.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum IntrinsicsError {
    #[error("focal lengths must be positive, got fx = {fx}, fy = {fy}")]
    NonPositiveFocal { fx: f64, fy: f64 },
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, IntrinsicsError> {
        if fx <= 0.0 || fy <= 0.0 {
            return Err(IntrinsicsError::NonPositiveFocal { fx, fy });
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Row-major "cam_K" layout: [fx, 0, cx, 0, fy, cy, 0, 0, 1].
    pub fn from_k_row_major(k: &[f64; 9]) -> Result<Self, IntrinsicsError> {
        Self::new(k[0], k[4], k[2], k[5])
    }

    /// Projects a camera-frame point (mm) to pixel coordinates.
    pub fn project(&self, p: &Vector3<f64>) -> Result<Vector2<f64>, ProjectionError> {
        if p.z <= 0.0 {
            return Err(ProjectionError::NonPositiveDepth { z: p.z });
        }
        Ok(Vector2::new(
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        ))
    }
}

/// Rotation about an arbitrary unit axis by an angle in radians.
pub fn rotation_about_axis(axis: &Vector3<f64>, angle_rad: f64) -> Matrix3<f64> {
    let axis = nalgebra::Unit::new_normalize(*axis);
    nalgebra::Rotation3::from_axis_angle(&axis, angle_rad).into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rz(deg: f64) -> Matrix3<f64> {
        rotation_about_axis(&Vector3::z(), deg.to_radians())
    }

    fn rx(deg: f64) -> Matrix3<f64> {
        rotation_about_axis(&Vector3::x(), deg.to_radians())
    }

    fn ry(deg: f64) -> Matrix3<f64> {
        rotation_about_axis(&Vector3::y(), deg.to_radians())
    }

    #[test]
    fn compose_identity_is_noop() {
        let t = RigidTransform::new(rz(30.0), Vector3::new(1.0, 2.0, 3.0)).unwrap();
        let (dr, dt) = t.compose(&RigidTransform::identity()).distance_to(&t);
        assert!(dr < 1e-12 && dt < 1e-12);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let t = RigidTransform::new(rz(73.0), Vector3::new(-4.0, 9.0, 0.5)).unwrap();
        let (dr, dt) = t.compose(&t.inverse()).distance_to(&RigidTransform::identity());
        assert!(dr < 1e-9 && dt < 1e-9);
    }

    #[test]
    fn compose_two_quarter_turns() {
        // Oracle: brute-force 4x4 homogeneous multiply of Rz(90) with itself.
        let a = RigidTransform::new(rz(90.0), Vector3::zeros()).unwrap();
        let got = a.compose(&a);
        let mut h = nalgebra::Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&rz(90.0));
        let h2 = h * h;
        let expected: Matrix3<f64> = h2.fixed_view::<3, 3>(0, 0).into();
        assert_relative_eq!(got.rotation(), &expected, epsilon = 1e-12);
        assert_relative_eq!(got.rotation(), &rz(180.0), epsilon = 1e-12);
    }

    #[test]
    fn inverse_identity() {
        let (dr, dt) = RigidTransform::identity()
            .inverse()
            .distance_to(&RigidTransform::identity());
        assert!(dr == 0.0 && dt == 0.0);
    }

    #[test]
    fn inverse_pure_translation_negates() {
        let t = RigidTransform::from_translation(Vector3::new(10.0, 0.0, 0.0));
        assert_relative_eq!(
            t.inverse().translation(),
            &Vector3::new(-10.0, 0.0, 0.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn inverse_matches_numeric_4x4_inversion() {
        let t = RigidTransform::new(rz(30.0), Vector3::new(1.0, 2.0, 3.0)).unwrap();
        let mut h = nalgebra::Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(t.rotation());
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(t.translation());
        let hinv = h.try_inverse().unwrap();
        let inv = t.inverse();
        let r: Matrix3<f64> = hinv.fixed_view::<3, 3>(0, 0).into();
        let tr: Vector3<f64> = hinv.fixed_view::<3, 1>(0, 3).into();
        assert_relative_eq!(inv.rotation(), &r, epsilon = 1e-12);
        assert_relative_eq!(inv.translation(), &tr, epsilon = 1e-12);
    }

    #[test]
    fn geodesic_trivial_cases() {
        let i = Matrix3::identity();
        assert_eq!(geodesic_angle_deg(&i, &i), 0.0);
        assert_relative_eq!(geodesic_angle_deg(&rz(10.0), &i), 10.0, epsilon = 1e-9);
    }

    #[test]
    fn geodesic_between_quarter_turns() {
        // Oracle: axis-angle decomposition of Rx(90) * Ry(90)^T gives 120 deg.
        let rel = rx(90.0) * ry(90.0).transpose();
        let axis_angle = nalgebra::Rotation3::from_matrix_unchecked(rel);
        let oracle = axis_angle.angle().to_degrees();
        assert_relative_eq!(oracle, 120.0, epsilon = 1e-9);
        assert_relative_eq!(
            geodesic_angle_deg(&rx(90.0), &ry(90.0)),
            120.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn geodesic_clamps_trace_overshoot() {
        // A rotation infinitesimally away from identity must not yield NaN.
        let r = rz(1e-9);
        assert!(geodesic_angle_deg(&r, &Matrix3::identity()).is_finite());
    }

    #[test]
    fn project_on_axis_and_offset() {
        let k = CameraIntrinsics::new(500.0, 500.0, 0.0, 0.0).unwrap();
        let p = k.project(&Vector3::new(0.0, 0.0, 1000.0)).unwrap();
        assert_eq!((p.x, p.y), (0.0, 0.0));
        let p = k.project(&Vector3::new(10.0, 0.0, 1000.0)).unwrap();
        assert_relative_eq!(p.x, 5.0, epsilon = 1e-12);
        assert_eq!(p.y, 0.0);
    }

    #[test]
    fn project_rejects_non_positive_depth() {
        let k = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0).unwrap();
        assert_eq!(
            k.project(&Vector3::new(1.0, 1.0, 0.0)),
            Err(ProjectionError::NonPositiveDepth { z: 0.0 })
        );
        assert!(k.project(&Vector3::new(1.0, 1.0, -5.0)).is_err());
    }

    #[test]
    fn rejects_non_orthonormal_rotation() {
        let mut r = Matrix3::identity();
        r[(0, 0)] = 1.1;
        assert!(RigidTransform::new(r, Vector3::zeros()).is_err());
    }

    #[test]
    fn renormalize_accepts_small_drift_rejects_large() {
        let mut r = rz(40.0);
        r[(0, 0)] += 1e-5;
        let t = RigidTransform::renormalized(r, Vector3::zeros(), 1e-3).unwrap();
        assert!(rotation_drift(t.rotation()) < 1e-12);
        let mut bad = rz(40.0);
        bad[(0, 0)] += 0.5;
        assert!(RigidTransform::renormalized(bad, Vector3::zeros(), 1e-3).is_err());
    }

    #[test]
    fn intrinsics_require_positive_focal() {
        assert!(CameraIntrinsics::new(0.0, 500.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(500.0, -1.0, 0.0, 0.0).is_err());
    }

    prop_compose! {
        fn arb_rotation()(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0,
                          angle in 0.0f64..std::f64::consts::PI)
            -> Matrix3<f64>
        {
            let v = Vector3::new(ax, ay, az);
            let axis = if v.norm() < 1e-6 { Vector3::z() } else { v };
            rotation_about_axis(&axis, angle)
        }
    }

    prop_compose! {
        fn arb_transform()(r in arb_rotation(),
                           tx in -500.0f64..500.0, ty in -500.0f64..500.0, tz in -500.0f64..500.0)
            -> RigidTransform
        {
            RigidTransform::new(r, Vector3::new(tx, ty, tz)).unwrap()
        }
    }

    proptest! {
        #[test]
        fn compose_is_associative(a in arb_transform(), b in arb_transform(), c in arb_transform()) {
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            let (dr, dt) = left.distance_to(&right);
            prop_assert!(dr < 1e-9 && dt < 1e-9);
        }

        #[test]
        fn geodesic_is_symmetric(r1 in arb_rotation(), r2 in arb_rotation()) {
            prop_assert_eq!(geodesic_angle_deg(&r1, &r2), geodesic_angle_deg(&r2, &r1));
        }

        #[test]
        fn geodesic_left_invariant(s in arb_rotation(), r1 in arb_rotation(), r2 in arb_rotation()) {
            let a = geodesic_angle_deg(&(s * r1), &(s * r2));
            let b = geodesic_angle_deg(&r1, &r2);
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b));
        }

        #[test]
        fn geodesic_in_range(r1 in arb_rotation(), r2 in arb_rotation()) {
            let a = geodesic_angle_deg(&r1, &r2);
            prop_assert!((0.0..=180.0).contains(&a));
        }

        #[test]
        fn projection_scale_invariant_along_rays(
            x in -300.0f64..300.0, y in -300.0f64..300.0, z in 10.0f64..2000.0,
            lambda in 0.01f64..100.0)
        {
            let k = CameraIntrinsics::new(572.4, 573.6, 325.3, 242.0).unwrap();
            let p = Vector3::new(x, y, z);
            let a = k.project(&p).unwrap();
            let b = k.project(&(p * lambda)).unwrap();
            prop_assert!((a - b).norm() < 1e-9);
        }
    }
}
