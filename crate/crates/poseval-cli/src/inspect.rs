//! Pretty-printed derivation of one evaluated pair: the deviation
//! transforms, the perturbed plans, and the metric record.

use crate::pipeline::{LoadedRun, PipelineError};
use poseval::bop::load_estimates;
use poseval::deviation::{deviation_in_world, deviation_to_sim, perturbed_plan, SimWorldConvention};
use poseval::metrics::evaluate_pair;
use poseval::RigidTransform;
use std::fmt::Write as _;

fn describe(label: &str, t: &RigidTransform, out: &mut String) {
    let r = t.rotation();
    let tr = t.translation();
    writeln!(out, "{label}:").unwrap();
    for i in 0..3 {
        writeln!(
            out,
            "  [{:11.6} {:11.6} {:11.6} | {:11.4}]",
            r[(i, 0)],
            r[(i, 1)],
            r[(i, 2)],
            tr[i]
        )
        .unwrap();
    }
}

/// Renders the full derivation for one (estimator, scene, image, object).
pub fn inspect_pair(
    run: &LoadedRun,
    estimator: &str,
    scene_id: u64,
    image_id: u64,
    object_id: u32,
) -> Result<String, PipelineError> {
    let result_file = run
        .config
        .result_files
        .iter()
        .find(|rf| rf.estimator == estimator)
        .ok_or_else(|| {
            PipelineError::Config(format!("no result file for estimator {estimator:?}"))
        })?;
    let gt = run
        .scenes
        .iter()
        .flat_map(|s| s.ground_truth.iter())
        .find(|g| g.scene_id == scene_id && g.image_id == image_id && g.object_id == object_id)
        .ok_or_else(|| {
            PipelineError::Config(format!(
                "no ground truth for scene {scene_id} image {image_id} object {object_id}"
            ))
        })?;
    let est = load_estimates(&result_file.path)?
        .into_iter()
        .find(|e| e.scene_id == scene_id && e.image_id == image_id && e.object_id == object_id)
        .ok_or_else(|| {
            PipelineError::Config(format!(
                "estimator {estimator:?} has no row for scene {scene_id} image {image_id} object {object_id}"
            ))
        })?;
    let object = run.models.get(&object_id).ok_or_else(|| {
        PipelineError::Config(format!("object {object_id} not in models_info.json"))
    })?;
    let camera = run
        .scenes
        .iter()
        .find(|s| s.scene_id == scene_id)
        .and_then(|s| s.cameras.get(&image_id))
        .ok_or_else(|| {
            PipelineError::Config(format!(
                "no camera intrinsics for scene {scene_id} image {image_id}"
            ))
        })?;

    let mut out = String::new();
    writeln!(
        out,
        "pair: estimator={estimator} scene={scene_id} image={image_id} object={object_id} (visibility {:.3})",
        gt.visibility
    )
    .unwrap();
    describe("ground truth pose (camera frame, mm)", &gt.pose, &mut out);
    describe("estimated pose (camera frame, mm)", &est.pose, &mut out);

    let delta_world = deviation_in_world(&est.pose, &gt.pose);
    describe("deviation in dataset world", &delta_world, &mut out);

    let sim = SimWorldConvention::rest_pose(&object.vertices);
    describe("object rest pose (simulator world)", &sim.object_pose_sim, &mut out);
    let delta_obj = gt
        .pose
        .inverse()
        .compose(&delta_world)
        .compose(&gt.pose);
    describe("deviation in object frame", &delta_obj, &mut out);
    let delta_sim = deviation_to_sim(&delta_world, &gt.pose, &sim.object_pose_sim);
    describe("deviation in simulator world", &delta_sim, &mut out);

    for gripper in run.grippers.keys() {
        match run
            .catalog
            .find(object_id, *gripper, run.config.grasp_index)
        {
            None => {
                writeln!(out, "{} grasp: not applicable (no catalog entry)", gripper.name())
                    .unwrap();
            }
            Some(grasp) => {
                describe(
                    &format!("{} reference hand pose", gripper.name()),
                    &grasp.hand_pose_ref,
                    &mut out,
                );
                let plan = perturbed_plan(&delta_sim, grasp);
                describe(&format!("{} perturbed plan", gripper.name()), &plan, &mut out);
            }
        }
    }

    let metrics = evaluate_pair(&est.pose, &gt.pose, object, camera);
    writeln!(out, "metrics:").unwrap();
    writeln!(out, "  rotation error: {:.6} deg", metrics.rotation_error_deg).unwrap();
    writeln!(
        out,
        "  translation error: {:.6} mm ({:.6} mm along view)",
        metrics.translation_error_mm, metrics.translation_error_along_view_mm
    )
    .unwrap();
    writeln!(out, "  ADD(-S): {:.6} mm", metrics.add_s_mm).unwrap();
    writeln!(out, "  MSSD: {:.6} mm", metrics.mssd_mm).unwrap();
    if metrics.has_mspd_sentinel() {
        writeln!(out, "  MSPD: +inf (object behind camera)").unwrap();
    } else {
        writeln!(out, "  MSPD: {:.6} px", metrics.mspd_px).unwrap();
    }
    Ok(out)
}
