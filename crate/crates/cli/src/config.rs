//! Run configuration: a TOML file with a `[run]` table and `[[models]]`
//! entries, merged with command-line overrides.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use epfbench::evaluation::{BacktestConfig, ModelHandle};
use epfbench::external::ExternalSpec;
use epfbench::ml::PipelineOptions;
use epfbench::{NativeKind, NativeModel};
use serde::{Deserialize, Serialize};

pub const DATA_ENV: &str = "EPFBENCH_DATA";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zones: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_start: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_end: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_days: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_hours: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform_targets: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl RunSection {
    /// Fields set in `other` win.
    pub fn overridden_by(self, other: RunSection) -> RunSection {
        RunSection {
            zones: other.zones.or(self.zones),
            test_start: other.test_start.or(self.test_start),
            test_end: other.test_end.or(self.test_end),
            train_days: other.train_days.or(self.train_days),
            input_hours: other.input_hours.or(self.input_hours),
            data_dir: other.data_dir.or(self.data_dir),
            out_dir: other.out_dir.or(self.out_dir),
            seed: other.seed.or(self.seed),
            transform_targets: other.transform_targets.or(self.transform_targets),
            jobs: other.jobs.or(self.jobs),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSource {
    #[default]
    Native,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    /// Label in every report.
    pub name: String,
    #[serde(default)]
    pub kind: ModelSource,
    /// Built-in family when `name` is a custom label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<f64>,
}

impl ModelEntry {
    pub fn native(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: ModelSource::Native,
            model: None,
            command: None,
            args: Vec::new(),
            timeout_secs: None,
        }
    }
}

/// Fields written by a run next to the replayable configuration. Ignored
/// when a run_meta file is used as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub created: String,
    pub dm_variance: String,
    pub significance: f64,
    pub decisions: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<RunMeta>,
}

impl RunFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub zones: Vec<String>,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
    pub train_days: usize,
    pub input_hours: usize,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub transform_targets: bool,
    pub jobs: Option<usize>,
    pub models: Vec<ModelEntry>,
}

impl RunConfig {
    pub fn resolve(run: RunSection, models: Vec<ModelEntry>) -> Result<Self> {
        let zones = run.zones.unwrap_or_default();
        if zones.is_empty() {
            bail!("no zones configured");
        }
        let test_start = run.test_start.context("test_start is not set")?;
        let test_end = run.test_end.context("test_end is not set")?;
        let data_dir = run
            .data_dir
            .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data"));
        let models = if models.is_empty() {
            NativeKind::ALL.iter().map(|k| ModelEntry::native(k.as_str())).collect()
        } else {
            models
        };
        let cfg = Self {
            zones,
            test_start,
            test_end,
            train_days: run.train_days.unwrap_or(84),
            input_hours: run.input_hours.unwrap_or(168),
            data_dir,
            out_dir: run.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            seed: run.seed.unwrap_or(0),
            transform_targets: run.transform_targets.unwrap_or(true),
            jobs: run.jobs,
            models,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.test_end < self.test_start {
            bail!("test span {}..{} is empty", self.test_start, self.test_end);
        }
        if self.train_days < 8 {
            bail!("train_days must be at least 8, got {}", self.train_days);
        }
        if self.input_hours == 0 || self.input_hours % 24 != 0 {
            bail!("input_hours must be a positive multiple of 24, got {}", self.input_hours);
        }
        if self.jobs == Some(0) {
            bail!("jobs must be at least 1");
        }
        for (i, z) in self.zones.iter().enumerate() {
            if self.zones[..i].contains(z) {
                bail!("zone {z} listed twice");
            }
        }
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].iter().any(|o| o.name == m.name) {
                bail!("model name {} used twice", m.name);
            }
            self.handle(m)?;
        }
        Ok(())
    }

    pub fn backtest(&self) -> BacktestConfig {
        BacktestConfig {
            train_days: self.train_days,
            input_hours: self.input_hours,
            ..BacktestConfig::new(self.test_start, self.test_end)
        }
    }

    pub fn zone_file(&self, zone: &str) -> PathBuf {
        self.data_dir.join(format!("{zone}.csv"))
    }

    fn handle(&self, entry: &ModelEntry) -> Result<ModelHandle> {
        match entry.kind {
            ModelSource::Native => {
                if entry.command.is_some() || !entry.args.is_empty() {
                    bail!("model {}: command/args only apply to external models", entry.name);
                }
                let family = entry.model.as_deref().unwrap_or(&entry.name);
                let kind: NativeKind = family
                    .parse()
                    .map_err(|e| anyhow::anyhow!("model {}: {e}", entry.name))?;
                let pipeline = PipelineOptions {
                    input_hours: self.input_hours,
                    transform_targets: self.transform_targets,
                    ..PipelineOptions::default()
                };
                Ok(ModelHandle::Native(Arc::new(
                    NativeModel::new(kind)
                        .with_name(entry.name.clone())
                        .with_pipeline(pipeline),
                )))
            }
            ModelSource::External => {
                let Some(command) = &entry.command else {
                    bail!("external model {} has no command", entry.name);
                };
                let mut spec = ExternalSpec::new(entry.name.clone(), command.clone());
                spec.args = entry.args.clone();
                spec.input_size = self.input_hours;
                if let Some(secs) = entry.timeout_secs {
                    if !(secs > 0.0 && secs.is_finite()) {
                        bail!("model {}: timeout_secs must be positive", entry.name);
                    }
                    spec.timeout = Duration::from_secs_f64(secs);
                }
                Ok(ModelHandle::External(spec))
            }
        }
    }

    pub fn handles(&self) -> Result<Vec<ModelHandle>> {
        self.models.iter().map(|m| self.handle(m)).collect()
    }

    /// The replayable part of run_meta.
    pub fn to_file(&self, meta: Option<RunMeta>) -> RunFile {
        RunFile {
            run: RunSection {
                zones: Some(self.zones.clone()),
                test_start: Some(self.test_start),
                test_end: Some(self.test_end),
                train_days: Some(self.train_days),
                input_hours: Some(self.input_hours),
                data_dir: Some(self.data_dir.clone()),
                out_dir: Some(self.out_dir.clone()),
                seed: Some(self.seed),
                transform_targets: Some(self.transform_targets),
                jobs: self.jobs,
            },
            models: self.models.clone(),
            meta,
        }
    }
}
