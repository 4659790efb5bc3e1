//! Per-pair pose error metrics: symmetry-aware rotation error,
//! translation error (total and along the viewing direction), ADD(-S),
//! MSSD and MSPD.

use crate::bop::{ObjectModel, SymmetrySpec};
use crate::se3::{CameraIntrinsics, RigidTransform};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Continuous symmetries are discretized into this many equal steps about
/// the axis for MSSD/MSPD/ADI, mirroring BOP's reference tooling. The
/// closed-form axis-deviation expression is used for rotation error
/// instead.
pub const CONTINUOUS_SYMMETRY_STEPS: usize = 36;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("vertex {vertex} has non-positive depth under every symmetry")]
    NonPositiveDepth { vertex: usize },
}

/// All five metrics for one matched pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct MetricRecord {
    pub rotation_error_deg: f64,
    pub translation_error_mm: f64,
    pub translation_error_along_view_mm: f64,
    pub add_s_mm: f64,
    pub mssd_mm: f64,
    /// `f64::INFINITY` sentinel when the estimate puts the object behind
    /// the camera (maximally wrong; ranked worst in CDFs, excluded from
    /// medians with a reported count).
    pub mspd_px: f64,
}

impl MetricRecord {
    pub fn has_mspd_sentinel(&self) -> bool {
        self.mspd_px.is_infinite()
    }
}

/// The effective discrete symmetry set: the declared discrete transforms
/// (identity included) composed with each discretized continuous step.
/// Objects with several continuous axes contribute the union over axes.
pub fn effective_symmetries(sym: &SymmetrySpec) -> Vec<RigidTransform> {
    if sym.continuous_axes.is_empty() {
        return sym.discrete.clone();
    }
    let mut out = Vec::new();
    for axis in &sym.continuous_axes {
        for step in 0..CONTINUOUS_SYMMETRY_STEPS {
            let angle = 2.0 * std::f64::consts::PI * step as f64 / CONTINUOUS_SYMMETRY_STEPS as f64;
            let c = axis.rotation(angle);
            for d in &sym.discrete {
                out.push(d.compose(&c));
            }
        }
    }
    out
}

/// Symmetry-aware rotation error in degrees.
///
/// Continuous symmetry is measured as the deviation of the symmetry axis:
/// the angle between `R a` and `R_hat a` (invariant to rotation about the
/// axis). Discrete symmetry minimizes the geodesic angle between
/// `R_hat S` and `R`. Objects with both take the minimum of the branches.
pub fn rotation_error_deg(
    est: &RigidTransform,
    gt: &RigidTransform,
    sym: &SymmetrySpec,
) -> f64 {
    let mut best = f64::INFINITY;
    for axis in &sym.continuous_axes {
        let gt_axis = gt.rotation() * axis.axis;
        let est_axis = est.rotation() * axis.axis;
        // atan2 form: well conditioned at small angles, unlike acos.
        let angle = gt_axis
            .cross(&est_axis)
            .norm()
            .atan2(gt_axis.dot(&est_axis))
            .to_degrees();
        best = best.min(angle);
    }
    if sym.continuous_axes.is_empty() || sym.discrete.len() > 1 {
        for s in &sym.discrete {
            let angle = crate::se3::geodesic_angle_deg(&(est.rotation() * s.rotation()), gt.rotation());
            best = best.min(angle);
        }
    }
    best
}

/// Translation error: total Euclidean distance and its component along
/// the camera viewing direction (+z of the BOP camera frame).
pub fn translation_error_mm(est: &RigidTransform, gt: &RigidTransform) -> (f64, f64) {
    let d = est.translation() - gt.translation();
    (d.norm(), d.z.abs())
}

/// Maximum symmetry-aware surface distance (mm):
/// min over S of max over x of ||T_hat x - T S x||.
pub fn mssd(
    est: &RigidTransform,
    gt: &RigidTransform,
    sym: &SymmetrySpec,
    vertices: &[Vector3<f64>],
) -> f64 {
    let mut best = f64::INFINITY;
    for s in effective_symmetries(sym) {
        let gt_s = gt.compose(&s);
        let mut worst = 0.0f64;
        for v in vertices {
            worst = worst.max((est.apply(v) - gt_s.apply(v)).norm());
            if worst >= best {
                break; // cannot beat the current symmetry
            }
        }
        best = best.min(worst);
    }
    best
}

/// Maximum symmetry-aware projection distance (pixels):
/// min over S of max over x of ||pi(T_hat x) - pi(T S x)||.
///
/// A symmetry under which any vertex falls behind the camera contributes
/// an infinite maximum; when that happens for every symmetry the error is
/// returned with the offending vertex index.
pub fn mspd(
    est: &RigidTransform,
    gt: &RigidTransform,
    sym: &SymmetrySpec,
    vertices: &[Vector3<f64>],
    k: &CameraIntrinsics,
) -> Result<f64, MetricError> {
    let mut best = f64::INFINITY;
    let mut first_bad_vertex = None;
    for s in effective_symmetries(sym) {
        let gt_s = gt.compose(&s);
        let mut worst = 0.0f64;
        let mut valid = true;
        for (i, v) in vertices.iter().enumerate() {
            let a = k.project(&est.apply(v));
            let b = k.project(&gt_s.apply(v));
            match (a, b) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b).norm()),
                _ => {
                    first_bad_vertex.get_or_insert(i);
                    valid = false;
                    break;
                }
            }
            if worst >= best {
                break;
            }
        }
        if valid {
            best = best.min(worst);
        }
    }
    if best.is_infinite() {
        Err(MetricError::NonPositiveDepth {
            vertex: first_bad_vertex.unwrap_or(0),
        })
    } else {
        Ok(best)
    }
}

/// ADD(-S) (mm): average distance with correspondence (ADD) for objects
/// with trivial symmetry, nearest-neighbor average (ADI) otherwise.
/// Nearest-neighbor search is exact over the subsampled vertex set.
pub fn add_s(
    est: &RigidTransform,
    gt: &RigidTransform,
    sym: &SymmetrySpec,
    vertices: &[Vector3<f64>],
) -> f64 {
    assert!(!vertices.is_empty());
    if sym.is_trivial() {
        let sum: f64 = vertices
            .iter()
            .map(|v| (est.apply(v) - gt.apply(v)).norm())
            .sum();
        return sum / vertices.len() as f64;
    }
    let gt_points: Vec<Vector3<f64>> = vertices.iter().map(|v| gt.apply(v)).collect();
    let sum: f64 = vertices
        .iter()
        .map(|v| {
            let p = est.apply(v);
            gt_points
                .iter()
                .map(|q| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    sum / vertices.len() as f64
}

/// Bundles the five metrics for one matched pair. A behind-camera MSPD
/// becomes the `+inf` sentinel rather than an error.
pub fn evaluate_pair(
    est: &RigidTransform,
    gt: &RigidTransform,
    model: &ObjectModel,
    k: &CameraIntrinsics,
) -> MetricRecord {
    let (translation_error, along_view) = translation_error_mm(est, gt);
    MetricRecord {
        rotation_error_deg: rotation_error_deg(est, gt, &model.symmetry),
        translation_error_mm: translation_error,
        translation_error_along_view_mm: along_view,
        add_s_mm: add_s(est, gt, &model.symmetry, &model.vertices),
        mssd_mm: mssd(est, gt, &model.symmetry, &model.vertices),
        mspd_px: mspd(est, gt, &model.symmetry, &model.vertices, k).unwrap_or(f64::INFINITY),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bop::ContinuousAxis;
    use crate::se3::rotation_about_axis;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Independent brute-force oracle over raw arrays; deliberately avoids
    /// RigidTransform's group operations.
    mod oracle {
        use nalgebra::{Matrix3, Vector3};

        fn apply(r: &Matrix3<f64>, t: &Vector3<f64>, p: &Vector3<f64>) -> Vector3<f64> {
            r * p + t
        }

        pub fn mssd(
            est: (&Matrix3<f64>, &Vector3<f64>),
            gt: (&Matrix3<f64>, &Vector3<f64>),
            syms: &[(Matrix3<f64>, Vector3<f64>)],
            vertices: &[Vector3<f64>],
        ) -> f64 {
            let mut best = f64::INFINITY;
            for (sr, st) in syms {
                let mut worst = 0.0f64;
                for v in vertices {
                    let sv = apply(sr, st, v);
                    let a = apply(est.0, est.1, v);
                    let b = apply(gt.0, gt.1, &sv);
                    worst = worst.max((a - b).norm());
                }
                best = best.min(worst);
            }
            best
        }

        pub fn mspd(
            est: (&Matrix3<f64>, &Vector3<f64>),
            gt: (&Matrix3<f64>, &Vector3<f64>),
            syms: &[(Matrix3<f64>, Vector3<f64>)],
            vertices: &[Vector3<f64>],
            (fx, fy, cx, cy): (f64, f64, f64, f64),
        ) -> f64 {
            let project = |p: Vector3<f64>| -> Option<(f64, f64)> {
                (p.z > 0.0).then(|| (fx * p.x / p.z + cx, fy * p.y / p.z + cy))
            };
            let mut best = f64::INFINITY;
            for (sr, st) in syms {
                let mut worst = 0.0f64;
                let mut ok = true;
                for v in vertices {
                    let a = project(apply(est.0, est.1, v));
                    let b = project(apply(gt.0, gt.1, &apply(sr, st, v)));
                    match (a, b) {
                        (Some(a), Some(b)) => {
                            worst = worst.max(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
                        }
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    best = best.min(worst);
                }
            }
            best
        }

        pub fn adi(
            est: (&Matrix3<f64>, &Vector3<f64>),
            gt: (&Matrix3<f64>, &Vector3<f64>),
            vertices: &[Vector3<f64>],
        ) -> f64 {
            let mut sum = 0.0;
            for v in vertices {
                let p = apply(est.0, est.1, v);
                let mut nearest = f64::INFINITY;
                for w in vertices {
                    let q = apply(gt.0, gt.1, w);
                    nearest = nearest.min((p - q).norm());
                }
                sum += nearest;
            }
            sum / vertices.len() as f64
        }
    }

    fn rz(deg: f64) -> nalgebra::Matrix3<f64> {
        rotation_about_axis(&Vector3::z(), deg.to_radians())
    }

    fn transform(r: nalgebra::Matrix3<f64>, t: [f64; 3]) -> RigidTransform {
        RigidTransform::new(r, Vector3::new(t[0], t[1], t[2])).unwrap()
    }

    fn random_transform(rng: &mut impl Rng, t_range: f64) -> RigidTransform {
        let axis = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let axis = if axis.norm() < 1e-6 { Vector3::z() } else { axis };
        let angle = rng.gen::<f64>() * std::f64::consts::PI;
        let t = Vector3::new(
            (rng.gen::<f64>() - 0.5) * t_range,
            (rng.gen::<f64>() - 0.5) * t_range,
            (rng.gen::<f64>() - 0.5) * t_range,
        );
        RigidTransform::new(rotation_about_axis(&axis, angle), t).unwrap()
    }

    fn random_mesh(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<Vector3<f64>> {
        (0..n)
            .map(|_| {
                Vector3::new(
                    (rng.gen::<f64>() - 0.5) * scale,
                    (rng.gen::<f64>() - 0.5) * scale,
                    (rng.gen::<f64>() - 0.5) * scale,
                )
            })
            .collect()
    }

    fn half_turn_sym() -> SymmetrySpec {
        SymmetrySpec::new(
            vec![RigidTransform::from_rotation(rz(180.0)).unwrap()],
            vec![],
        )
    }

    #[test]
    fn rotation_error_zero_for_equal_poses() {
        let t = transform(rz(33.0), [1.0, 2.0, 3.0]);
        assert!(rotation_error_deg(&t, &t, &SymmetrySpec::trivial()) < 1e-9);
    }

    #[test]
    fn square_prism_wraps_through_symmetry() {
        // est rotated 170 deg about z from gt; {I, Rz(180)} folds it to 10.
        let gt = transform(rz(20.0), [0.0; 3]);
        let est = transform(rz(20.0) * rz(170.0), [0.0; 3]);
        let got = rotation_error_deg(&est, &gt, &half_turn_sym());
        // Brute force over both branches.
        let oracle = [0.0, 180.0]
            .iter()
            .map(|s| crate::se3::geodesic_angle_deg(&(est.rotation() * rz(*s)), gt.rotation()))
            .fold(f64::INFINITY, f64::min);
        assert!((got - 10.0).abs() < 1e-9, "{got}");
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn soup_can_axis_rotation_is_free() {
        let sym = SymmetrySpec::new(
            vec![],
            vec![ContinuousAxis::new(Vector3::z(), Vector3::zeros()).unwrap()],
        );
        let gt = transform(rotation_about_axis(&Vector3::new(1.0, 1.0, 0.3), 0.7), [0.0; 3]);
        let est = transform(gt.rotation() * rz(123.4), [0.0; 3]);
        assert!(rotation_error_deg(&est, &gt, &sym) < 1e-9);
    }

    #[test]
    fn translation_error_cases() {
        let gt = transform(rz(10.0), [0.0; 3]);
        assert_eq!(translation_error_mm(&gt, &gt), (0.0, 0.0));
        let est = transform(rz(10.0), [3.0, 4.0, 0.0]);
        let (total, view) = translation_error_mm(&est, &gt);
        assert!((total - 5.0).abs() < 1e-12 && view == 0.0);
        let est = transform(rz(10.0), [0.0, 0.0, 7.0]);
        assert_eq!(translation_error_mm(&est, &gt), (7.0, 7.0));
    }

    #[test]
    fn mssd_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mesh = random_mesh(&mut rng, 40, 60.0);
        let gt = random_transform(&mut rng, 200.0);
        assert_eq!(mssd(&gt, &gt, &SymmetrySpec::trivial(), &mesh), 0.0);
        // Pure translation offset: MSSD equals the offset norm for any mesh.
        let d = Vector3::new(3.0, -4.0, 12.0);
        let est = RigidTransform::from_translation(d).compose(&gt);
        let got = mssd(&est, &gt, &SymmetrySpec::trivial(), &mesh);
        assert!((got - d.norm()).abs() < 1e-9);
    }

    #[test]
    fn mssd_matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let mesh = random_mesh(&mut rng, 50, 80.0);
            let gt = random_transform(&mut rng, 300.0);
            let est = random_transform(&mut rng, 300.0);
            let sym = half_turn_sym();
            let syms: Vec<_> = sym
                .discrete
                .iter()
                .map(|s| (*s.rotation(), *s.translation()))
                .collect();
            let got = mssd(&est, &gt, &sym, &mesh);
            let want = oracle::mssd(
                (est.rotation(), est.translation()),
                (gt.rotation(), gt.translation()),
                &syms,
                &mesh,
            );
            assert!((got - want).abs() <= 1e-9 * (1.0 + want));
        }
    }

    #[test]
    fn mspd_single_vertex_pinhole() {
        let k = CameraIntrinsics::new(500.0, 500.0, 0.0, 0.0).unwrap();
        let mesh = vec![Vector3::zeros()];
        let gt = RigidTransform::from_translation(Vector3::new(0.0, 0.0, 1000.0));
        let est = RigidTransform::from_translation(Vector3::new(10.0, 0.0, 1000.0));
        let got = mspd(&est, &gt, &SymmetrySpec::trivial(), &mesh, &k).unwrap();
        assert!((got - 5.0).abs() < 1e-12);
        assert_eq!(mspd(&gt, &gt, &SymmetrySpec::trivial(), &mesh, &k).unwrap(), 0.0);
    }

    #[test]
    fn mspd_behind_camera_reports_vertex() {
        let k = CameraIntrinsics::new(500.0, 500.0, 0.0, 0.0).unwrap();
        let mesh = vec![Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0)];
        let gt = RigidTransform::from_translation(Vector3::new(0.0, 0.0, 1000.0));
        let est = RigidTransform::from_translation(Vector3::new(0.0, 0.0, -1000.0));
        assert_eq!(
            mspd(&est, &gt, &SymmetrySpec::trivial(), &mesh, &k),
            Err(MetricError::NonPositiveDepth { vertex: 0 })
        );
    }

    #[test]
    fn add_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mesh = random_mesh(&mut rng, 30, 50.0);
        let gt = random_transform(&mut rng, 200.0);
        // ADD with pure translation equals the offset exactly.
        let d = Vector3::new(0.3, 0.4, 1.2);
        let est = RigidTransform::from_translation(d).compose(&gt);
        let got = add_s(&est, &gt, &SymmetrySpec::trivial(), &mesh);
        assert!((got - d.norm()).abs() < 1e-12);
        // Equal poses are zero on both branches.
        assert_eq!(add_s(&gt, &gt, &SymmetrySpec::trivial(), &mesh), 0.0);
        assert_eq!(add_s(&gt, &gt, &half_turn_sym(), &mesh), 0.0);
    }

    #[test]
    fn adi_matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let mesh = random_mesh(&mut rng, 30, 50.0);
            let gt = random_transform(&mut rng, 100.0);
            let est = random_transform(&mut rng, 100.0);
            let got = add_s(&est, &gt, &half_turn_sym(), &mesh);
            let want = oracle::adi(
                (est.rotation(), est.translation()),
                (gt.rotation(), gt.translation()),
                &mesh,
            );
            assert!((got - want).abs() <= 1e-9 * (1.0 + want));
        }
    }

    #[test]
    fn add_s_never_exceeds_mssd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mesh = random_mesh(&mut rng, 40, 60.0);
            let gt = random_transform(&mut rng, 150.0);
            let est = random_transform(&mut rng, 150.0);
            for sym in [SymmetrySpec::trivial(), half_turn_sym()] {
                let a = add_s(&est, &gt, &sym, &mesh);
                let m = mssd(&est, &gt, &sym, &mesh);
                assert!(a <= m + 1e-9, "add_s {a} > mssd {m}");
            }
        }
    }

    #[test]
    fn symmetry_gauge_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let sym = SymmetrySpec::new(
            vec![
                RigidTransform::from_rotation(rz(90.0)).unwrap(),
                RigidTransform::from_rotation(rz(180.0)).unwrap(),
                RigidTransform::from_rotation(rz(270.0)).unwrap(),
            ],
            vec![],
        );
        for _ in 0..20 {
            let mesh = random_mesh(&mut rng, 40, 60.0);
            let gt = random_transform(&mut rng, 150.0);
            let est = random_transform(&mut rng, 150.0);
            let base_rot = rotation_error_deg(&est, &gt, &sym);
            let base_mssd = mssd(&est, &gt, &sym, &mesh);
            for s in &sym.discrete {
                let gauged = gt.compose(s);
                assert!((rotation_error_deg(&est, &gauged, &sym) - base_rot).abs() < 1e-9);
                assert!((mssd(&est, &gauged, &sym, &mesh) - base_mssd).abs() < 1e-9 * (1.0 + base_mssd));
            }
        }
    }

    #[test]
    fn subset_never_increases_max_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = CameraIntrinsics::new(570.0, 570.0, 320.0, 240.0).unwrap();
        let mesh = random_mesh(&mut rng, 60, 60.0);
        let gt = RigidTransform::new(rz(15.0), Vector3::new(20.0, -10.0, 900.0)).unwrap();
        let est = RigidTransform::new(rz(25.0), Vector3::new(25.0, -5.0, 950.0)).unwrap();
        let sym = half_turn_sym();
        let full_mssd = mssd(&est, &gt, &sym, &mesh);
        let full_mspd = mspd(&est, &gt, &sym, &mesh, &k).unwrap();
        let subset = &mesh[..30];
        assert!(mssd(&est, &gt, &sym, subset) <= full_mssd + 1e-12);
        assert!(mspd(&est, &gt, &sym, subset, &k).unwrap() <= full_mspd + 1e-12);
    }

    #[test]
    fn rotation_error_left_invariant_discrete() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let gt = random_transform(&mut rng, 10.0);
            let est = random_transform(&mut rng, 10.0);
            let s = random_transform(&mut rng, 0.0);
            let sym = half_turn_sym();
            let base = rotation_error_deg(&est, &gt, &sym);
            let left = RigidTransform::from_rotation(*s.rotation()).unwrap();
            let gauged = rotation_error_deg(&left.compose(&est), &left.compose(&gt), &sym);
            assert!((base - gauged).abs() < 1e-9, "{base} vs {gauged}");
        }
    }

    #[test]
    fn evaluate_pair_zero_for_exact_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = ObjectModel {
            object_id: 1,
            vertices: random_mesh(&mut rng, 20, 40.0),
            full_vertex_count: 20,
            diameter: 70.0,
            symmetry: SymmetrySpec::trivial(),
            mass_kg: 0.2,
            friction_coefficient: 0.5,
        };
        let k = CameraIntrinsics::new(570.0, 570.0, 320.0, 240.0).unwrap();
        let gt = RigidTransform::from_translation(Vector3::new(0.0, 0.0, 800.0));
        let rec = evaluate_pair(&gt, &gt, &model, &k);
        assert_eq!(rec.rotation_error_deg, 0.0);
        assert_eq!(rec.translation_error_mm, 0.0);
        assert_eq!(rec.add_s_mm, 0.0);
        assert_eq!(rec.mssd_mm, 0.0);
        assert_eq!(rec.mspd_px, 0.0);
        assert!(!rec.has_mspd_sentinel());
    }

    #[test]
    fn evaluate_pair_sets_sentinel_behind_camera() {
        let model = ObjectModel {
            object_id: 1,
            vertices: vec![Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0)],
            full_vertex_count: 3,
            diameter: 2.0,
            symmetry: SymmetrySpec::trivial(),
            mass_kg: 0.2,
            friction_coefficient: 0.5,
        };
        let k = CameraIntrinsics::new(570.0, 570.0, 320.0, 240.0).unwrap();
        let gt = RigidTransform::from_translation(Vector3::new(0.0, 0.0, 800.0));
        let est = RigidTransform::from_translation(Vector3::new(0.0, 0.0, -800.0));
        let rec = evaluate_pair(&est, &gt, &model, &k);
        assert!(rec.has_mspd_sentinel());
        assert!(rec.mssd_mm > 0.0 && rec.mssd_mm.is_finite());
    }

    #[test]
    fn mspd_oracle_agreement_with_continuous_discretization() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let k = (570.0, 575.0, 320.0, 240.0);
        let intr = CameraIntrinsics::new(k.0, k.1, k.2, k.3).unwrap();
        for _ in 0..5 {
            let mesh = random_mesh(&mut rng, 30, 50.0);
            let gt = RigidTransform::new(rz(30.0), Vector3::new(10.0, 5.0, 700.0)).unwrap();
            let est = RigidTransform::new(rz(38.0), Vector3::new(12.0, 1.0, 720.0)).unwrap();
            let sym = SymmetrySpec::new(
                vec![RigidTransform::from_rotation(rz(180.0)).unwrap()],
                vec![ContinuousAxis::new(Vector3::z(), Vector3::new(1.0, 2.0, 0.0)).unwrap()],
            );
            let syms: Vec<_> = effective_symmetries(&sym)
                .iter()
                .map(|s| (*s.rotation(), *s.translation()))
                .collect();
            let got = mspd(&est, &gt, &sym, &mesh, &intr).unwrap();
            let want = oracle::mspd(
                (est.rotation(), est.translation()),
                (gt.rotation(), gt.translation()),
                &syms,
                &mesh,
                k,
            );
            assert!((got - want).abs() <= 1e-9 * (1.0 + want));
        }
    }
}
