use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_file, ExperimentError};
use crate::codesign::EvolutionConfig;
use crate::env::{CaveGeometry, TaskId, TaskSpec, DEFAULT_EPISODE_LENGTH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainOverride {
    /// Inline floor height field, `[x, height]` pairs.
    Floor(Vec<[f64; 2]>),
    Cave(CaveGeometry),
}

/// One JSON document describing a run. Missing fields take their defaults;
/// the resolved document is echoed into the run report. `codesign.seed` is
/// replaced by each entry of `seeds` in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: String,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub episode_length: usize,
    pub terrain: Option<TerrainOverride>,
    pub codesign: EvolutionConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: TaskId::Walker.name().to_string(),
            seeds: vec![0],
            output_dir: PathBuf::from("runs/default"),
            episode_length: DEFAULT_EPISODE_LENGTH,
            terrain: None,
            codesign: EvolutionConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_json(&read_file(path)?).map_err(|e| match e {
            ExperimentError::Config(m) => ExperimentError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn task_id(&self) -> Result<TaskId, ExperimentError> {
        self.task.parse().map_err(|e: crate::env::UnknownTask| ExperimentError::Config(e.to_string()))
    }

    pub fn task_spec(&self) -> Result<TaskSpec, ExperimentError> {
        let spec = TaskSpec::new(self.task_id()?).with_episode_length(self.episode_length);
        Ok(match &self.terrain {
            None => spec,
            Some(TerrainOverride::Floor(points)) => spec.with_floor(points.clone()),
            Some(TerrainOverride::Cave(g)) => spec.with_cave(*g),
        })
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.task_id()?;
        if self.seeds.is_empty() {
            return Err(ExperimentError::Config("seeds must not be empty".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(ExperimentError::Config("seeds must be distinct".into()));
        }
        if self.episode_length == 0 {
            return Err(ExperimentError::Config("episode_length must be positive".into()));
        }
        if let Some(TerrainOverride::Floor(points)) = &self.terrain {
            if points.is_empty() || points.iter().flatten().any(|v| !v.is_finite()) {
                return Err(ExperimentError::Config("floor needs at least one finite point".into()));
            }
        }
        self.codesign.validate().map_err(|e| ExperimentError::Config(e.to_string()))
    }
}
