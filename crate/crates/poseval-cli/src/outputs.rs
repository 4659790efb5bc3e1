//! Deterministic artifact tree: CSV/JSON outputs, manifest, and the
//! content-hash stage cache.
//!
//! Every data file is byte-identical across reruns of the same config and
//! inputs: stable row order, shortest round-trip float formatting, no
//! timestamps.

use crate::config::RunConfig;
use crate::pipeline::{EvaluationOutput, PipelineError};
use poseval::analysis::{
    auc_records, failure_cdf, summarize_with_exclusions, AucRecord, MetricKind, ObjectSummary,
};
use poseval::catalog::Gripper;
use poseval::trial::TrialRecord;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "".to_string(), |v| v.to_string())
}

/// SHA-256 of the config (serialized) plus every input file's bytes.
/// Identifies a run for caching and the manifest.
pub fn run_content_hash(config: &RunConfig) -> Result<String, PipelineError> {
    let mut hasher = Sha256::new();
    // The output location does not affect results, so exclude it: the same
    // inputs hash identically regardless of where artifacts land.
    let mut hashed_config = config.clone();
    hashed_config.output_dir = PathBuf::new();
    hasher.update(toml::to_string(&hashed_config).unwrap_or_default().as_bytes());
    let mut files: Vec<PathBuf> = vec![
        config.gripper_config.clone(),
        config.grasp_catalog.clone(),
        config.physical_sidecar.clone(),
    ];
    for rf in &config.result_files {
        files.push(rf.path.clone());
    }
    // Dataset files, in sorted order for determinism.
    let mut stack = vec![config.dataset_root.clone()];
    while let Some(dir) = stack.pop() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for path in entries {
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path);
            }
        }
    }
    files.sort();
    for path in files {
        hasher.update(path.to_string_lossy().as_bytes());
        hasher.update(std::fs::read(&path)?);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Loads a cached evaluation stage, or computes and stores it. The cache
/// key is the full run content hash, so any input change invalidates it.
pub fn cached_evaluation(
    output_dir: &Path,
    hash: &str,
    compute: impl FnOnce() -> Result<EvaluationOutput, PipelineError>,
) -> Result<EvaluationOutput, PipelineError> {
    let cache_dir = output_dir.join(".cache");
    let cache_file = cache_dir.join(format!("evaluation-{hash}.json"));
    if let Ok(bytes) = std::fs::read(&cache_file) {
        if let Ok(cached) = serde_json::from_slice::<EvaluationOutput>(&bytes) {
            log::info!("evaluation stage: cache hit ({})", cache_file.display());
            return Ok(cached);
        }
        log::warn!("evaluation cache unreadable, recomputing");
    }
    let output = compute()?;
    std::fs::create_dir_all(&cache_dir)?;
    std::fs::write(&cache_file, serde_json::to_vec(&output).expect("serializable"))?;
    Ok(output)
}

pub struct Artifacts {
    pub summaries: Vec<ObjectSummary>,
    pub aucs: Vec<AucRecord>,
}

/// Writes the complete artifact tree and returns the aggregates.
pub fn write_artifacts(
    config: &RunConfig,
    output: &EvaluationOutput,
    hash: &str,
) -> Result<Artifacts, PipelineError> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir.join("curves"))?;

    // Per-pair metrics.
    let mut metrics_csv = String::from(
        "estimator,scene_id,im_id,obj_id,rotation_error_deg,translation_error_mm,\
         translation_error_along_view_mm,add_s_mm,mssd_mm,mspd_px\n",
    );
    for pm in &output.pair_metrics {
        let m = &pm.metrics;
        writeln!(
            metrics_csv,
            "{},{},{},{},{},{},{},{},{},{}",
            pm.estimator,
            pm.scene_id,
            pm.image_id,
            pm.object_id,
            m.rotation_error_deg,
            m.translation_error_mm,
            m.translation_error_along_view_mm,
            m.add_s_mm,
            m.mssd_mm,
            m.mspd_px
        )
        .unwrap();
    }
    std::fs::write(dir.join("metrics.csv"), metrics_csv)?;

    // Per-trial records.
    let mut trials_csv = String::from(
        "estimator,scene_id,im_id,obj_id,gripper,grasp_index,success,failure_stage,final_distance_mm\n",
    );
    for t in &output.trials {
        writeln!(
            trials_csv,
            "{},{},{},{},{},{},{},{},{}",
            t.keys.estimator,
            t.keys.scene_id,
            t.keys.image_id,
            t.keys.object_id,
            t.keys.gripper.name(),
            t.keys.grasp_index,
            t.success,
            t.failure_stage.name(),
            fmt_opt(t.final_distance_mm)
        )
        .unwrap();
    }
    std::fs::write(dir.join("trials.csv"), trials_csv)?;

    // Aggregates.
    let summaries = summarize_with_exclusions(&output.trials, &output.excluded_map());
    let mut summary_csv = String::from(
        "estimator,obj_id,gripper,median_rotation_error_deg,median_translation_error_mm,\
         p90_translation_error_mm,median_add_s_mm,median_mssd_mm,median_mspd_px,\
         success_rate,trial_count,excluded_count,sentinel_count\n",
    );
    for s in &summaries {
        writeln!(
            summary_csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.estimator,
            s.object_id,
            s.gripper.name(),
            fmt_opt(s.median_rotation_error_deg),
            fmt_opt(s.median_translation_error_mm),
            fmt_opt(s.p90_translation_error_mm),
            fmt_opt(s.median_add_s_mm),
            fmt_opt(s.median_mssd_mm),
            fmt_opt(s.median_mspd_px),
            s.success_rate,
            s.trial_count,
            s.excluded_count,
            s.sentinel_count
        )
        .unwrap();
    }
    std::fs::write(dir.join("summary.csv"), summary_csv)?;
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summaries).expect("serializable"),
    )?;

    let aucs = auc_records(&output.trials, config.auc_include_projection);
    let mut auc_csv = String::from("estimator,obj_id,gripper,metric,auc\n");
    for a in &aucs {
        writeln!(
            auc_csv,
            "{},{},{},{},{}",
            a.estimator,
            a.object_id,
            a.gripper.name(),
            a.metric.name(),
            a.auc
        )
        .unwrap();
    }
    std::fs::write(dir.join("auc.csv"), auc_csv)?;
    std::fs::write(
        dir.join("auc.json"),
        serde_json::to_string_pretty(&aucs).expect("serializable"),
    )?;

    // Pooled failure curves per gripper and metric (plot-ready).
    let mut curve_metrics: Vec<MetricKind> = MetricKind::auc_default().to_vec();
    if config.auc_include_projection {
        curve_metrics.push(MetricKind::Mspd);
    }
    for gripper in [Gripper::Parallel, Gripper::Underactuated] {
        let pool: Vec<&TrialRecord> = output
            .trials
            .iter()
            .filter(|t| t.keys.gripper == gripper)
            .collect();
        if pool.is_empty() {
            continue;
        }
        for metric in &curve_metrics {
            let curve = failure_cdf(&pool, *metric);
            let mut csv = String::from("metric_value,cumulative_failure_fraction\n");
            for (x, y) in &curve {
                writeln!(csv, "{x},{y}").unwrap();
            }
            std::fs::write(
                dir.join("curves")
                    .join(format!("{}_{}.csv", gripper.name(), metric.name())),
                csv,
            )?;
        }
    }

    // Manifest: run identity without timestamps, so reruns are
    // byte-identical end to end.
    let mut manifest = BTreeMap::new();
    manifest.insert("tool_version", serde_json::json!(TOOL_VERSION));
    manifest.insert("content_hash", serde_json::json!(hash));
    manifest.insert(
        "estimators",
        serde_json::json!(output
            .spurious
            .keys()
            .cloned()
            .collect::<Vec<_>>()),
    );
    manifest.insert("spurious_estimates", serde_json::json!(output.spurious));
    manifest.insert(
        "pair_metric_rows",
        serde_json::json!(output.pair_metrics.len()),
    );
    manifest.insert("trial_rows", serde_json::json!(output.trials.len()));
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("serializable"),
    )?;

    Ok(Artifacts { summaries, aucs })
}
