//! Pairing estimates with ground truth on (scene, image, object) keys.

use super::{EstimateRecord, GroundTruthRecord};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct MatchedPair {
    pub estimate: EstimateRecord,
    pub ground_truth: GroundTruthRecord,
}

/// Output of [`match_records`]. Ground-truth entries with no estimate are
/// retained: a missing detection counts against the estimator downstream.
#[derive(Debug, Default)]
pub struct MatchReport {
    pub pairs: Vec<MatchedPair>,
    /// Visible ground truth with no matching estimate (failed trials).
    pub unmatched_ground_truth: Vec<GroundTruthRecord>,
    /// Estimates with no ground truth (spurious detections).
    pub spurious_estimates: Vec<EstimateRecord>,
    /// Ground-truth entries dropped for visibility below the minimum.
    pub below_visibility: usize,
}

/// Pairs records on (scene_id, image_id, object_id). Ground truth below
/// `visibility_min` is dropped before matching. Duplicate estimates for
/// one key resolve to the highest score; exact ties keep the first in
/// file order (BOP single-instance convention).
pub fn match_records(
    estimates: &[EstimateRecord],
    ground_truth: &[GroundTruthRecord],
    visibility_min: f64,
) -> MatchReport {
    let mut best: BTreeMap<(u64, u64, u32), &EstimateRecord> = BTreeMap::new();
    let mut spurious_pool: Vec<&EstimateRecord> = Vec::new();
    for est in estimates {
        let key = (est.scene_id, est.image_id, est.object_id);
        match best.get(&key) {
            Some(current) if current.score >= est.score => spurious_pool.push(est),
            Some(current) => {
                spurious_pool.push(current);
                best.insert(key, est);
            }
            None => {
                best.insert(key, est);
            }
        }
    }

    let mut report = MatchReport::default();
    for gt in ground_truth {
        if gt.visibility < visibility_min {
            report.below_visibility += 1;
            continue;
        }
        let key = (gt.scene_id, gt.image_id, gt.object_id);
        match best.remove(&key) {
            Some(est) => report.pairs.push(MatchedPair {
                estimate: est.clone(),
                ground_truth: gt.clone(),
            }),
            None => report.unmatched_ground_truth.push(gt.clone()),
        }
    }
    // Whatever never matched any visible ground truth is spurious.
    report
        .spurious_estimates
        .extend(best.into_values().cloned());
    report.spurious_estimates.extend(spurious_pool.into_iter().cloned());
    report
}
