//! Config-driven runs and their on-disk artifacts: generation logs, designs,
//! checkpoints, fitness curves and plots.

mod compare;
mod config;
mod plot;
mod replay;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use compare::{compare, compare_reports, CompareRow, COMPARE_HEADER};
pub use config::{ExperimentConfig, TerrainOverride};
pub use plot::{render_svg, Series};
pub use replay::{replay, ReplayOutput, ReplayRequest, ACTUATION_HEADER};
pub use run::{curves_csv, run, run_config, RunReport, SeedReport, CURVE_HEADER, REPORT_FORMAT};

use crate::codesign::CodesignError;
use crate::control::ControlError;
use crate::env::EnvError;
use crate::grid::GridError;
use crate::physics::PhysicsError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("simulation diverged: {0}")]
    Diverged(String),
    #[error("controller is incompatible with the design: {0}")]
    IncompatibleController(String),
    #[error("reports have different horizons: {0}")]
    MismatchedHorizons(String),
    #[error("invalid design: {0}")]
    InvalidDesign(GridError),
}

impl ExperimentError {
    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::InvalidDesign(_) => 1,
            ExperimentError::Config(_) | ExperimentError::IncompatibleController(_) | ExperimentError::MismatchedHorizons(_) => 2,
            ExperimentError::Io { .. } => 3,
            ExperimentError::Diverged(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<CodesignError> for ExperimentError {
    fn from(e: CodesignError) -> Self {
        match e {
            CodesignError::AllDiverged { .. } | CodesignError::Env(EnvError::Physics(PhysicsError::SimulationDiverged { .. })) => {
                ExperimentError::Diverged(e.to_string())
            }
            CodesignError::Grid(g) => ExperimentError::InvalidDesign(g),
            other => ExperimentError::Config(other.to_string()),
        }
    }
}

impl From<ControlError> for ExperimentError {
    fn from(e: ControlError) -> Self {
        match e {
            ControlError::Env(EnvError::Physics(PhysicsError::SimulationDiverged { .. })) => ExperimentError::Diverged(e.to_string()),
            ControlError::DimensionMismatch { .. } => ExperimentError::IncompatibleController(e.to_string()),
            other => ExperimentError::Config(other.to_string()),
        }
    }
}

impl From<EnvError> for ExperimentError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::Physics(PhysicsError::SimulationDiverged { .. }) => ExperimentError::Diverged(e.to_string()),
            EnvError::Physics(PhysicsError::InvalidDesign(g)) => ExperimentError::InvalidDesign(g),
            other => ExperimentError::Config(other.to_string()),
        }
    }
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| ExperimentError::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String, ExperimentError> {
    std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))
}

pub const THREADS_VAR: &str = "VOXELSOFT_THREADS";

/// Caps the global worker pool at `VOXELSOFT_THREADS` when set. Returns the
/// cap that was applied.
pub fn configure_threads() -> Result<Option<usize>, ExperimentError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ExperimentError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}
