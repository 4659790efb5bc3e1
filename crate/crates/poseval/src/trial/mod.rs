//! Four-stage open-loop grasp trials against a grasp-outcome model.
//!
//! The built-in surrogate is quasi-static and geometric: it decides
//! closure feasibility from the perturbed hand pose, the object mesh and
//! estimated contact normals, with no dynamics integration. An external
//! physics simulator can replace it through the line-delimited JSON
//! adapter protocol in [`adapter`].

pub mod adapter;
mod gripper;
mod surrogate;

pub use adapter::{AdapterRequest, AdapterResponse, ExternalAdapter};
pub use gripper::{load_gripper_config, GripperModel};
pub use surrogate::SurrogateOutcome;

use crate::bop::ObjectModel;
use crate::catalog::{Gripper, ReferenceGrasp};
use crate::metrics::MetricRecord;
use crate::se3::RigidTransform;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default success tolerance: the hand-base-to-centroid distance must be
/// within 5 cm of the reference target distance.
pub const DEFAULT_TOLERANCE_MM: f64 = 50.0;
/// Default post-lift hold period (protocol parameter; the surrogate is
/// quasi-static and holds indefinitely).
pub const DEFAULT_HOLD_S: f64 = 15.0;

#[derive(Debug, Error)]
pub enum TrialError {
    #[error("outcome model unavailable: {0}")]
    OutcomeModelUnavailable(String),
    #[error("adapter protocol error: {detail}")]
    ProtocolError { detail: String },
    #[error("object {object_id}: mesh has fewer than 4 non-coplanar vertices")]
    DegenerateMesh { object_id: u32 },
}

/// Where an unsuccessful trial first went wrong. The taxonomy is an
/// artifact addition for debuggability; reported statistics use only the
/// binary verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureStage {
    None,
    PreGraspCollision,
    NoClosure,
    SlipOrEject,
    ToleranceExceeded,
    MissingEstimate,
}

impl FailureStage {
    pub fn name(&self) -> &'static str {
        match self {
            FailureStage::None => "none",
            FailureStage::PreGraspCollision => "pre_grasp_collision",
            FailureStage::NoClosure => "no_closure",
            FailureStage::SlipOrEject => "slip_or_eject",
            FailureStage::ToleranceExceeded => "tolerance_exceeded",
            FailureStage::MissingEstimate => "missing_estimate",
        }
    }
}

/// One trial to execute: object at its simulator rest pose, perturbed
/// Stage-I hand pose, and the reference grasp it derives from.
#[derive(Debug, Clone)]
pub struct TrialSpec<'a> {
    pub object: &'a ObjectModel,
    pub object_pose_sim: RigidTransform,
    pub plan: RigidTransform,
    pub grasp: &'a ReferenceGrasp,
}

/// Verdict from an outcome model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub success: bool,
    pub failure_stage: FailureStage,
    pub final_distance_mm: f64,
}

/// A grasp-outcome model: the built-in surrogate or an external
/// simulator adapter. Implementations must be deterministic for
/// identical inputs.
pub trait OutcomeModel {
    fn evaluate(&self, spec: &TrialSpec, gripper: &GripperModel) -> Result<Outcome, TrialError>;
}

/// Identifying keys of one evaluated trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialKeys {
    pub scene_id: u64,
    pub image_id: u64,
    pub object_id: u32,
    pub estimator: String,
    pub gripper: Gripper,
    pub grasp_index: u32,
}

/// The complete evaluated unit: metrics plus the binary grasp verdict.
/// `metrics` is `None` for ground truth with no estimate (the trial is a
/// failure with stage `missing_estimate`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub keys: TrialKeys,
    pub metrics: Option<MetricRecord>,
    pub success: bool,
    pub failure_stage: FailureStage,
    pub final_distance_mm: Option<f64>,
}

impl TrialRecord {
    /// Record for a visible ground-truth object the estimator never
    /// detected: counted as a failed trial, never excluded.
    pub fn missing_estimate(keys: TrialKeys) -> Self {
        Self {
            keys,
            metrics: None,
            success: false,
            failure_stage: FailureStage::MissingEstimate,
            final_distance_mm: None,
        }
    }
}

/// Runs stages 0-III for one trial and assembles the record.
pub fn run_trial(
    keys: TrialKeys,
    spec: &TrialSpec,
    gripper: &GripperModel,
    model: &dyn OutcomeModel,
    metrics: Option<MetricRecord>,
) -> Result<TrialRecord, TrialError> {
    let outcome = model.evaluate(spec, gripper)?;
    debug_assert!(!outcome.success || outcome.failure_stage == FailureStage::None);
    Ok(TrialRecord {
        keys,
        metrics,
        success: outcome.success,
        failure_stage: outcome.failure_stage,
        final_distance_mm: Some(outcome.final_distance_mm),
    })
}
