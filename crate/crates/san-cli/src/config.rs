//! Resolved run configuration for the experiment commands.
//!
//! Every experiment command assembles an [`ExperimentConfig`] from its
//! flags (or loads one with `--config`), validates it, embeds it in the
//! emitted report, and writes it next to the report as `config.json` — a
//! run is reproducible from that file and nothing else.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use san_core::eval::GridSpec;
use san_core::ingest::EdgeSet;
use san_core::labels::{NegativeMode, Scope, Task};
use san_core::scorers::ScorerSpec;
use san_core::supervised::Variant;
use san_core::{Error, Result};

/// Everything a `predict`, `infer` or `iterate` run depends on. Fields
/// irrelevant to a command (for example `top_k` during `predict`) are
/// carried but ignored, so one config can drive a whole pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Snapshot manifest produced by `san ingest` or `san generate`.
    pub manifest: PathBuf,
    /// Label of the training snapshot.
    pub train: String,
    /// Label of the snapshot pair used for hyperparameter selection.
    pub validate: String,
    /// Label of the evaluation snapshot.
    pub test: String,
    pub task: Task,
    pub scope: Scope,
    pub negatives: NegativeMode,
    /// Which social edge set to read from each snapshot.
    pub edges: EdgeSet,
    /// Scorers for `infer` and `iterate`, which take full specs rather
    /// than grid-searched families.
    pub scorers: Vec<ScorerSpec>,
    pub grid: GridSpec,
    /// Supervised feature set; `predict` switches from the unsupervised
    /// scorer table to one supervised run when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    pub trials: usize,
    /// Fraction of users whose attributes are hidden per trial.
    pub sample_fraction: f64,
    /// Attributes inferred per hidden user.
    pub top_k: usize,
    /// Pre@K cutoffs reported by `infer`.
    pub precision_ks: Vec<usize>,
    /// Whether `infer` also runs the supervised attribute-inference
    /// method next to the unsupervised scorers.
    #[serde(default)]
    pub sai: bool,
    /// Infer→augment rounds for `iterate`; more than one is experimental.
    pub iterations: usize,
    /// Master seed; every stage derives from it. Mandatory — a config
    /// without a seed does not parse.
    pub seed: u64,
    /// Output directory for reports and tables.
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(json: &str, source: &str) -> Result<ExperimentConfig> {
        serde_json::from_str(json)
            .map_err(|e| Error::parse(source, Some(e.line()), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut json =
            serde_json::to_string_pretty(self).expect("config serialization cannot fail");
        json.push('\n');
        json
    }

    /// Compact one-line rendering, embedded in report notes.
    pub fn to_compact_json(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&content, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Structural checks that do not require touching the manifest.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::precondition("trials must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.sample_fraction) {
            return Err(Error::precondition(format!(
                "sample fraction must lie in [0, 1], got {}",
                self.sample_fraction
            )));
        }
        if self.iterations == 0 {
            return Err(Error::precondition("iterations must be at least 1"));
        }
        if self.precision_ks.is_empty() || self.precision_ks.contains(&0) {
            return Err(Error::precondition("Pre@K cutoffs must be positive"));
        }
        Ok(())
    }
}
