//! Aggregation of trial records into per-object statistics, failure-rate
//! cumulative-distribution curves and their areas.

use crate::catalog::Gripper;
use crate::trial::TrialRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which metric axis a curve or area refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Rotation,
    Translation,
    AddS,
    Mssd,
    Mspd,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Rotation => "rot",
            MetricKind::Translation => "trans",
            MetricKind::AddS => "add_s",
            MetricKind::Mssd => "mssd",
            MetricKind::Mspd => "mspd",
        }
    }

    /// The four default area-report metrics; projection error is
    /// available behind an explicit opt-in.
    pub fn auc_default() -> [MetricKind; 4] {
        [
            MetricKind::Rotation,
            MetricKind::Translation,
            MetricKind::AddS,
            MetricKind::Mssd,
        ]
    }

    pub fn extract(&self, record: &TrialRecord) -> Option<f64> {
        let m = record.metrics.as_ref()?;
        Some(match self {
            MetricKind::Rotation => m.rotation_error_deg,
            MetricKind::Translation => m.translation_error_mm,
            MetricKind::AddS => m.add_s_mm,
            MetricKind::Mssd => m.mssd_mm,
            MetricKind::Mspd => m.mspd_px,
        })
    }
}

/// Grouping key for summaries and curves.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub estimator: String,
    pub object_id: u32,
    pub gripper: Gripper,
}

impl GroupKey {
    pub fn of(record: &TrialRecord) -> Self {
        Self {
            estimator: record.keys.estimator.clone(),
            object_id: record.keys.object_id,
            gripper: record.keys.gripper,
        }
    }
}

/// Per-group statistics row. Medians are taken over finite metric values
/// only; infinite projection errors are counted in `sentinel_count`.
/// Medians are `None` when a group has no finite value for that metric
/// (for example, every estimate placed the object behind the camera).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSummary {
    pub estimator: String,
    pub object_id: u32,
    pub gripper: Gripper,
    pub median_rotation_error_deg: Option<f64>,
    pub median_translation_error_mm: Option<f64>,
    pub p90_translation_error_mm: Option<f64>,
    pub median_add_s_mm: Option<f64>,
    pub median_mssd_mm: Option<f64>,
    pub median_mspd_px: Option<f64>,
    /// successes / (successes + failures); missing estimates count as
    /// failures, not-applicable object-gripper pairs are excluded.
    pub success_rate: f64,
    pub trial_count: usize,
    /// Ground-truth instances skipped because the catalog has no grasp
    /// for this object-gripper pair.
    pub excluded_count: usize,
    /// Records whose projection error hit the behind-camera sentinel.
    pub sentinel_count: usize,
}

/// One area-under-curve result in raw metric units times failure
/// fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucRecord {
    pub estimator: String,
    pub object_id: u32,
    pub gripper: Gripper,
    pub metric: MetricKind,
    pub auc: f64,
}

/// Percentile by linear interpolation between closest ranks:
/// rank = p/100 x (n - 1), interpolating between the flanking order
/// statistics. `values` need not be sorted; non-finite values must be
/// filtered out by the caller.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 50.0)
}

fn finite_values(records: &[&TrialRecord], metric: MetricKind) -> Vec<f64> {
    records
        .iter()
        .filter_map(|r| metric.extract(r))
        .filter(|v| v.is_finite())
        .collect()
}

fn group(records: &[TrialRecord]) -> BTreeMap<GroupKey, Vec<&TrialRecord>> {
    let mut groups: BTreeMap<GroupKey, Vec<&TrialRecord>> = BTreeMap::new();
    for record in records {
        groups.entry(GroupKey::of(record)).or_default().push(record);
    }
    groups
}

/// Builds one summary row per (estimator, object, gripper) group, in
/// sorted group-key order. `excluded` carries, per group, the number of
/// ground-truth instances that were skipped because no catalog grasp
/// applies; groups present only in `excluded` produce no row.
pub fn summarize_with_exclusions(
    records: &[TrialRecord],
    excluded: &BTreeMap<GroupKey, usize>,
) -> Vec<ObjectSummary> {
    group(records)
        .into_iter()
        .map(|(key, members)| {
            let successes = members.iter().filter(|r| r.success).count();
            let sentinel_count = members
                .iter()
                .filter(|r| {
                    r.metrics
                        .as_ref()
                        .is_some_and(|m| m.has_mspd_sentinel())
                })
                .count();
            let translations = finite_values(&members, MetricKind::Translation);
            ObjectSummary {
                median_rotation_error_deg: median(&finite_values(&members, MetricKind::Rotation)),
                median_translation_error_mm: median(&translations),
                p90_translation_error_mm: percentile(&translations, 90.0),
                median_add_s_mm: median(&finite_values(&members, MetricKind::AddS)),
                median_mssd_mm: median(&finite_values(&members, MetricKind::Mssd)),
                median_mspd_px: median(&finite_values(&members, MetricKind::Mspd)),
                success_rate: successes as f64 / members.len() as f64,
                trial_count: members.len(),
                excluded_count: excluded.get(&key).copied().unwrap_or(0),
                sentinel_count,
                estimator: key.estimator,
                object_id: key.object_id,
                gripper: key.gripper,
            }
        })
        .collect()
}

pub fn summarize(records: &[TrialRecord]) -> Vec<ObjectSummary> {
    summarize_with_exclusions(records, &BTreeMap::new())
}

/// Cumulative failure fraction as a function of increasing metric value,
/// pooled over all given records.
///
/// Records are sorted by metric value; each distinct value yields one
/// point `(value, failures_at_or_below / total)`. Records with no metric
/// value (missing estimates) or an infinite value rank worst: they are
/// folded into a final vertical step at the largest finite value, so the
/// terminal y-value is always the group's overall failure rate.
pub fn failure_cdf(records: &[&TrialRecord], metric: MetricKind) -> Vec<(f64, f64)> {
    if records.is_empty() {
        return Vec::new();
    }
    let total = records.len() as f64;
    let mut finite: Vec<(f64, bool)> = Vec::new();
    let mut worst_failures = 0usize;
    for r in records {
        match metric.extract(r) {
            Some(v) if v.is_finite() => finite.push((v, r.success)),
            _ => {
                if !r.success {
                    worst_failures += 1;
                }
            }
        }
    }
    finite.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut curve: Vec<(f64, f64)> = Vec::new();
    let mut failures = 0usize;
    let mut i = 0;
    while i < finite.len() {
        let value = finite[i].0;
        while i < finite.len() && finite[i].0 == value {
            if !finite[i].1 {
                failures += 1;
            }
            i += 1;
        }
        curve.push((value, failures as f64 / total));
    }
    if worst_failures > 0 {
        let x = curve.last().map_or(0.0, |p| p.0);
        curve.push((x, (failures + worst_failures) as f64 / total));
    }
    curve
}

/// Trapezoidal area under a failure curve, in raw metric units.
///
/// The curve is integrated over the observed value range: the area is the
/// sum of trapezoids between consecutive points, with no contribution
/// before the first observed value (no failures can accumulate there).
/// Degenerate ranges (all values equal, or an empty curve) give 0.
pub fn auc(curve: &[(f64, f64)]) -> f64 {
    curve
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// One area record per group per default metric (projection error is
/// omitted unless `include_projection` is set).
pub fn auc_records(records: &[TrialRecord], include_projection: bool) -> Vec<AucRecord> {
    let mut metrics: Vec<MetricKind> = MetricKind::auc_default().to_vec();
    if include_projection {
        metrics.push(MetricKind::Mspd);
    }
    let mut out = Vec::new();
    for (key, members) in group(records) {
        for &metric in &metrics {
            out.push(AucRecord {
                estimator: key.estimator.clone(),
                object_id: key.object_id,
                gripper: key.gripper,
                metric,
                auc: auc(&failure_cdf(&members, metric)),
            });
        }
    }
    out
}

/// Median fraction of the translation error that lies along the viewing
/// direction, over records with a positive total translation error.
pub fn view_axis_fraction(records: &[TrialRecord]) -> Option<f64> {
    let ratios: Vec<f64> = records
        .iter()
        .filter_map(|r| r.metrics.as_ref())
        .filter(|m| m.translation_error_mm > 0.0)
        .map(|m| m.translation_error_along_view_mm / m.translation_error_mm)
        .collect();
    median(&ratios)
}

/// Spearman rank correlation with average ranks for ties. Returns `None`
/// for fewer than two points or a constant sequence.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j - 1) as f64 / 2.0 + 1.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        i = j;
    }
    ranks
}
