//! TOML run configuration.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {detail}")]
    Invalid { path: String, detail: String },
    #[error("{path}: cannot read config: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl ConfigError {
    fn invalid(path: &Path, detail: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.display().to_string(),
            detail: detail.into(),
        }
    }
}

/// One estimator result file (BOP result CSV).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub estimator: String,
    pub path: PathBuf,
}

/// Which grasp-outcome model judges the trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeModelChoice {
    Surrogate,
    /// Endpoint spec for an external simulator: `cmd:`, `tcp:` or `unix:`.
    External(String),
}

/// The full run configuration. All relative paths are resolved against
/// the config file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// BOP dataset root: contains `models/` and scene directories (either
    /// directly or under `test/`).
    pub dataset_root: PathBuf,
    pub result_files: Vec<ResultFile>,
    /// Restrict evaluation to these object ids; omit for all objects.
    #[serde(default)]
    pub objects: Option<Vec<u32>>,
    #[serde(default = "default_visibility_min")]
    pub visibility_min: f64,
    pub gripper_config: PathBuf,
    pub grasp_catalog: PathBuf,
    pub physical_sidecar: PathBuf,
    /// `"surrogate"` (default) or `"external:<endpoint>"`.
    #[serde(default = "default_outcome_model")]
    pub outcome_model: String,
    #[serde(default)]
    pub grasp_index: u32,
    #[serde(default = "default_tolerance_mm")]
    pub tolerance_mm: f64,
    #[serde(default = "default_hold_s")]
    pub hold_s: f64,
    pub output_dir: PathBuf,
    /// Include projection error in the AUC report (off by default).
    #[serde(default)]
    pub auc_include_projection: bool,
}

fn default_visibility_min() -> f64 {
    0.5
}
fn default_outcome_model() -> String {
    "surrogate".to_string()
}
fn default_tolerance_mm() -> f64 {
    50.0
}
fn default_hold_s() -> f64 {
    15.0
}

impl RunConfig {
    pub fn outcome_model_choice(&self) -> Result<OutcomeModelChoice, String> {
        if self.outcome_model == "surrogate" {
            Ok(OutcomeModelChoice::Surrogate)
        } else if let Some(endpoint) = self.outcome_model.strip_prefix("external:") {
            Ok(OutcomeModelChoice::External(endpoint.to_string()))
        } else {
            Err(format!(
                "outcome_model must be \"surrogate\" or \"external:<endpoint>\", got {:?}",
                self.outcome_model
            ))
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&p);
    }
}

/// Loads and validates a config file. Referenced input paths must exist;
/// `output_dir` is created on demand by the pipeline.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut config: RunConfig =
        toml::from_str(&text).map_err(|e| ConfigError::invalid(path, e.to_string()))?;

    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    resolve(&base, &mut config.dataset_root);
    resolve(&base, &mut config.gripper_config);
    resolve(&base, &mut config.grasp_catalog);
    resolve(&base, &mut config.physical_sidecar);
    resolve(&base, &mut config.output_dir);
    for rf in &mut config.result_files {
        resolve(&base, &mut rf.path);
    }

    if !(0.0..=1.0).contains(&config.visibility_min) {
        return Err(ConfigError::invalid(
            path,
            format!(
                "visibility_min must be within [0, 1], got {}",
                config.visibility_min
            ),
        ));
    }
    if config.tolerance_mm <= 0.0 {
        return Err(ConfigError::invalid(
            path,
            format!("tolerance_mm must be positive, got {}", config.tolerance_mm),
        ));
    }
    if config.result_files.is_empty() {
        return Err(ConfigError::invalid(path, "result_files must be non-empty"));
    }
    config
        .outcome_model_choice()
        .map_err(|detail| ConfigError::invalid(path, detail))?;

    for (field, p) in [
        ("dataset_root", &config.dataset_root),
        ("gripper_config", &config.gripper_config),
        ("grasp_catalog", &config.grasp_catalog),
        ("physical_sidecar", &config.physical_sidecar),
    ] {
        if !p.exists() {
            return Err(ConfigError::invalid(
                path,
                format!("{field} path does not exist: {}", p.display()),
            ));
        }
    }
    for rf in &config.result_files {
        if !rf.path.exists() {
            return Err(ConfigError::invalid(
                path,
                format!(
                    "result file for estimator {:?} does not exist: {}",
                    rf.estimator,
                    rf.path.display()
                ),
            ));
        }
    }
    Ok(config)
}
