//! End-to-end evaluation pipeline: ingest, match, metrics, trials.

use crate::config::{OutcomeModelChoice, RunConfig};
use poseval::analysis::GroupKey;
use poseval::bop::{
    load_estimates, load_models, load_physical_sidecar, load_scene_cameras,
    load_scene_ground_truth, match_records, BopError, GroundTruthRecord, ObjectModel,
};
use poseval::catalog::{Gripper, GraspCatalog};
use poseval::deviation::{deviation_in_world, deviation_to_sim, perturbed_plan, SimWorldConvention};
use poseval::metrics::{evaluate_pair, MetricRecord};
use poseval::se3::CameraIntrinsics;
use poseval::trial::{
    run_trial, ExternalAdapter, GripperModel, OutcomeModel, SurrogateOutcome, TrialError,
    TrialKeys, TrialRecord,
};
use poseval::RigidTransform;
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Parse(#[from] BopError),
    #[error("catalog: {0}")]
    Catalog(String),
    #[error(transparent)]
    Trial(#[from] TrialError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything loaded from disk for one run.
pub struct LoadedRun {
    pub config: RunConfig,
    pub models: BTreeMap<u32, ObjectModel>,
    pub catalog: GraspCatalog,
    pub grippers: BTreeMap<Gripper, GripperModel>,
    pub scenes: Vec<SceneData>,
}

pub struct SceneData {
    pub scene_id: u64,
    pub ground_truth: Vec<GroundTruthRecord>,
    pub cameras: BTreeMap<u64, CameraIntrinsics>,
}

/// One matched pair's metric row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairMetric {
    pub estimator: String,
    pub scene_id: u64,
    pub image_id: u64,
    pub object_id: u32,
    pub metrics: MetricRecord,
}

/// Full evaluation result, before aggregation.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct EvaluationOutput {
    pub pair_metrics: Vec<PairMetric>,
    pub trials: Vec<TrialRecord>,
    /// Ground-truth instances dropped by the visibility filter, per group
    /// (sorted; kept as pairs so the stage cache serializes to JSON).
    pub excluded: Vec<(GroupKey, usize)>,
    /// Estimates with no matching ground truth, per estimator.
    pub spurious: BTreeMap<String, usize>,
}

impl EvaluationOutput {
    pub fn excluded_map(&self) -> BTreeMap<GroupKey, usize> {
        self.excluded.iter().cloned().collect()
    }
}

fn scene_dirs(dataset_root: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut roots = vec![dataset_root.to_path_buf(), dataset_root.join("test")];
    roots.retain(|r| r.is_dir());
    let mut found = Vec::new();
    for root in roots {
        for entry in std::fs::read_dir(&root)? {
            let path = entry?.path();
            if path.is_dir() && path.join("scene_gt.json").is_file() {
                found.push(path);
            }
        }
    }
    found.sort();
    if found.is_empty() {
        return Err(PipelineError::Config(format!(
            "no scene directories (containing scene_gt.json) under {}",
            dataset_root.display()
        )));
    }
    Ok(found)
}

pub fn load_inputs(config: &RunConfig) -> Result<LoadedRun, PipelineError> {
    let sidecar = load_physical_sidecar(&config.physical_sidecar)?;
    let mut models = load_models(&config.dataset_root.join("models"), &sidecar)?;
    if let Some(wanted) = &config.objects {
        models.retain(|id, _| wanted.contains(id));
        for id in wanted {
            if !models.contains_key(id) {
                return Err(PipelineError::Config(format!(
                    "config lists object {id}, which is absent from models_info.json"
                )));
            }
        }
    }
    let catalog = GraspCatalog::load(&config.grasp_catalog)
        .map_err(|e| PipelineError::Catalog(e.to_string()))?;
    let grippers = load_gripper_models(&config.gripper_config)?;

    let mut scenes = Vec::new();
    for dir in scene_dirs(&config.dataset_root)? {
        let ground_truth = load_scene_ground_truth(&dir)?;
        let cameras = load_scene_cameras(&dir)?;
        let scene_id = ground_truth.first().map(|g| g.scene_id).unwrap_or(0);
        scenes.push(SceneData {
            scene_id,
            ground_truth,
            cameras,
        });
    }
    Ok(LoadedRun {
        config: config.clone(),
        models,
        catalog,
        grippers,
        scenes,
    })
}

fn load_gripper_models(path: &Path) -> Result<BTreeMap<Gripper, GripperModel>, PipelineError> {
    poseval::trial::load_gripper_config(path)
        .map_err(|e| PipelineError::Config(format!("gripper config: {e}")))
}

pub fn build_outcome_model(config: &RunConfig) -> Result<Box<dyn OutcomeModel + Sync>, PipelineError> {
    match config
        .outcome_model_choice()
        .map_err(PipelineError::Config)?
    {
        OutcomeModelChoice::Surrogate => Ok(Box::new(SurrogateOutcome::new(config.tolerance_mm))),
        OutcomeModelChoice::External(endpoint) => {
            let adapter =
                ExternalAdapter::connect(&endpoint, &config.dataset_root.join("models"))?;
            Ok(Box::new(adapter))
        }
    }
}

/// Runs the metric and trial passes for every estimator.
pub fn evaluate(run: &LoadedRun, model: &(dyn OutcomeModel + Sync)) -> Result<EvaluationOutput, PipelineError> {
    let mut output = EvaluationOutput::default();
    let mut excluded: BTreeMap<GroupKey, usize> = BTreeMap::new();
    let grippers: Vec<&GripperModel> = run.grippers.values().collect();

    for result_file in &run.config.result_files {
        let estimator = &result_file.estimator;
        let estimates = load_estimates(&result_file.path)?;

        // Visibility filter with per-object bookkeeping, then match.
        let mut visible_gt: Vec<GroundTruthRecord> = Vec::new();
        for scene in &run.scenes {
            for gt in &scene.ground_truth {
                if !run.models.contains_key(&gt.object_id) {
                    continue;
                }
                if gt.visibility < run.config.visibility_min {
                    for gripper in &grippers {
                        let key = GroupKey {
                            estimator: estimator.clone(),
                            object_id: gt.object_id,
                            gripper: gripper.gripper,
                        };
                        *excluded.entry(key).or_insert(0) += 1;
                    }
                } else {
                    visible_gt.push(gt.clone());
                }
            }
        }
        let report = match_records(&estimates, &visible_gt, 0.0);
        output
            .spurious
            .insert(estimator.clone(), report.spurious_estimates.len());

        let cameras: BTreeMap<(u64, u64), CameraIntrinsics> = run
            .scenes
            .iter()
            .flat_map(|s| {
                s.cameras
                    .iter()
                    .map(move |(image, k)| ((s.scene_id, *image), *k))
            })
            .collect();

        // Metric pass (parallel per pair).
        let pair_results: Result<Vec<(PairMetric, Vec<TrialRecord>)>, PipelineError> = report
            .pairs
            .par_iter()
            .map(|pair| {
                let model_obj = &run.models[&pair.ground_truth.object_id];
                let k = cameras
                    .get(&(pair.ground_truth.scene_id, pair.ground_truth.image_id))
                    .ok_or_else(|| {
                        PipelineError::Config(format!(
                            "scene {} image {}: no camera intrinsics",
                            pair.ground_truth.scene_id, pair.ground_truth.image_id
                        ))
                    })?;
                let metrics = evaluate_pair(&pair.estimate.pose, &pair.ground_truth.pose, model_obj, k);
                let pm = PairMetric {
                    estimator: estimator.clone(),
                    scene_id: pair.ground_truth.scene_id,
                    image_id: pair.ground_truth.image_id,
                    object_id: pair.ground_truth.object_id,
                    metrics,
                };
                let trials = run_pair_trials(run, model, estimator, pair.ground_truth.clone(), Some((&pair.estimate.pose, metrics)))?;
                Ok((pm, trials))
            })
            .collect();
        for (pm, trials) in pair_results? {
            output.pair_metrics.push(pm);
            output.trials.extend(trials);
        }

        // Missing detections: failed trials for every applicable gripper.
        for gt in &report.unmatched_ground_truth {
            output
                .trials
                .extend(run_pair_trials(run, model, estimator, gt.clone(), None)?);
        }
    }

    output.excluded = excluded.into_iter().collect();

    // Deterministic output order regardless of parallel scheduling.
    output.pair_metrics.sort_by(|a, b| {
        (&a.estimator, a.scene_id, a.image_id, a.object_id).cmp(&(
            &b.estimator,
            b.scene_id,
            b.image_id,
            b.object_id,
        ))
    });
    output.trials.sort_by(|a, b| {
        let ka = (&a.keys.estimator, a.keys.scene_id, a.keys.image_id, a.keys.object_id, a.keys.gripper, a.keys.grasp_index);
        let kb = (&b.keys.estimator, b.keys.scene_id, b.keys.image_id, b.keys.object_id, b.keys.gripper, b.keys.grasp_index);
        ka.cmp(&kb)
    });
    Ok(output)
}

/// Runs the grasp trials for one ground-truth instance: one per gripper
/// with a catalog entry. `estimate` is `None` for missing detections.
fn run_pair_trials(
    run: &LoadedRun,
    model: &(dyn OutcomeModel + Sync),
    estimator: &str,
    gt: GroundTruthRecord,
    estimate: Option<(&RigidTransform, MetricRecord)>,
) -> Result<Vec<TrialRecord>, PipelineError> {
    let object = &run.models[&gt.object_id];
    let sim = SimWorldConvention::rest_pose(&object.vertices);
    let mut trials = Vec::new();
    for gripper in run.grippers.values() {
        let Some(grasp) = run
            .catalog
            .find(gt.object_id, gripper.gripper, run.config.grasp_index)
        else {
            continue; // not-applicable: excluded from denominators
        };
        let keys = TrialKeys {
            scene_id: gt.scene_id,
            image_id: gt.image_id,
            object_id: gt.object_id,
            estimator: estimator.to_string(),
            gripper: gripper.gripper,
            grasp_index: run.config.grasp_index,
        };
        match estimate {
            None => trials.push(TrialRecord::missing_estimate(keys)),
            Some((est_pose, metrics)) => {
                let delta_world = deviation_in_world(est_pose, &gt.pose);
                let delta_sim = deviation_to_sim(&delta_world, &gt.pose, &sim.object_pose_sim);
                let plan = perturbed_plan(&delta_sim, grasp);
                let spec = TrialSpecOwned {
                    object,
                    object_pose_sim: sim.object_pose_sim,
                    plan,
                    grasp,
                };
                trials.push(run_trial(
                    keys,
                    &spec.as_spec(),
                    gripper,
                    model,
                    Some(metrics),
                )?);
            }
        }
    }
    Ok(trials)
}

struct TrialSpecOwned<'a> {
    object: &'a ObjectModel,
    object_pose_sim: RigidTransform,
    plan: RigidTransform,
    grasp: &'a poseval::catalog::ReferenceGrasp,
}

impl<'a> TrialSpecOwned<'a> {
    fn as_spec(&self) -> poseval::trial::TrialSpec<'a> {
        poseval::trial::TrialSpec {
            object: self.object,
            object_pose_sim: self.object_pose_sim,
            plan: self.plan,
            grasp: self.grasp,
        }
    }
}

/// Zero-deviation validation of every catalog entry against the loaded
/// models: a reference grasp must succeed with est = gt.
pub struct CatalogValidation {
    pub failures: Vec<String>,
    pub not_applicable: Vec<(u32, Gripper)>,
    pub validated: usize,
}

pub fn validate_catalog(
    run: &LoadedRun,
    model: &(dyn OutcomeModel + Sync),
) -> Result<CatalogValidation, PipelineError> {
    let mut failures = Vec::new();
    let mut validated = 0;
    for grasp in run.catalog.entries() {
        let Some(object) = run.models.get(&grasp.object_id) else {
            // Catalog may cover more objects than this run evaluates.
            continue;
        };
        let gripper = run.grippers.get(&grasp.gripper).ok_or_else(|| {
            PipelineError::Config(format!("no gripper model for {}", grasp.gripper.name()))
        })?;
        let sim = SimWorldConvention::rest_pose(&object.vertices);
        if let Err(min_z) = sim.validate(&object.vertices) {
            failures.push(format!(
                "object {}: rest pose leaves vertices below the support plane (min z {min_z})",
                grasp.object_id
            ));
            continue;
        }
        let spec = poseval::trial::TrialSpec {
            object,
            object_pose_sim: sim.object_pose_sim,
            plan: grasp.hand_pose_ref,
            grasp,
        };
        let outcome = model.evaluate(&spec, gripper)?;
        validated += 1;
        if !outcome.success {
            failures.push(format!(
                "object {} {} grasp {}: zero-deviation trial failed at stage {}",
                grasp.object_id,
                grasp.gripper.name(),
                grasp.grasp_index,
                outcome.failure_stage.name(),
            ));
        }
        // Sanity bound on the other side: a translation deviation larger
        // than the object diameter plus the gripper span moves the hand
        // clear of the object entirely, so the trial must fail.
        let gross = object.diameter + gripper.max_opening_mm + 1.0;
        let offset = RigidTransform::from_translation(Vector3::new(gross, 0.0, 0.0));
        let gross_spec = poseval::trial::TrialSpec {
            object,
            object_pose_sim: sim.object_pose_sim,
            plan: offset.compose(&grasp.hand_pose_ref),
            grasp,
        };
        let gross_outcome = model.evaluate(&gross_spec, gripper)?;
        if gross_outcome.success {
            failures.push(format!(
                "object {} {} grasp {}: trial still succeeds after a {gross:.0} mm translation deviation",
                grasp.object_id,
                grasp.gripper.name(),
                grasp.grasp_index,
            ));
        }
    }
    let mut not_applicable = Vec::new();
    for id in run.models.keys() {
        for gripper in run.grippers.keys() {
            if run.catalog.find(*id, *gripper, run.config.grasp_index).is_none() {
                not_applicable.push((*id, *gripper));
            }
        }
    }
    Ok(CatalogValidation {
        failures,
        not_applicable,
        validated,
    })
}
