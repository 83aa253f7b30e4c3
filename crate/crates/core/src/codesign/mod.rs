//! Bi-level co-design: an elitist evolutionary outer loop over bodies wrapped
//! around policy training, in reactive and invariant material paradigms plus
//! their two ablations.

mod evolution;
mod inner;
mod operators;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use evolution::{run_ablation, run_codesign, run_invariant_codesign, run_reactive_codesign, CodesignOutcome};
pub use inner::{evaluate, material_local_search, train_inner, Evaluation, InnerContext, LocalSearchOutcome, TrainOutcome};
pub use operators::{is_valid_morphology, mutate_material, mutate_morphology, random_material, random_morphology, MUTATION_ATTEMPTS};

use crate::control::{ControlError, PolicyParams, TrainConfig};
use crate::env::{EnvError, EnvMode, EnvOptions};
use crate::grid::{GridError, RobotDesign};
use crate::physics::SimParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodesignError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("every individual of generation {generation} diverged")]
    AllDiverged { generation: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Paradigm {
    /// Morphology evolution outside; motor and per-tick stiffness control inside.
    Reactive,
    /// Morphology and stiffness field evolve together; survivors get material
    /// local search and controller fine-tuning.
    Invariant,
    /// Reactive pipeline with every stiffness channel locked.
    FixedMaterial,
    /// Invariant pipeline with the field frozen at 1.0.
    PrescribedMaterial,
}

impl Paradigm {
    pub const ALL: [Paradigm; 4] = [Paradigm::Reactive, Paradigm::Invariant, Paradigm::FixedMaterial, Paradigm::PrescribedMaterial];

    pub fn name(self) -> &'static str {
        match self {
            Paradigm::Reactive => "Reactive",
            Paradigm::Invariant => "Invariant",
            Paradigm::FixedMaterial => "FixedMaterial",
            Paradigm::PrescribedMaterial => "PrescribedMaterial",
        }
    }

    pub fn env_mode(self) -> EnvMode {
        match self {
            Paradigm::Reactive | Paradigm::FixedMaterial => EnvMode::Reactive,
            Paradigm::Invariant | Paradigm::PrescribedMaterial => EnvMode::Invariant,
        }
    }

    /// Survivors go through the local-search / fine-tune phase.
    fn refines_survivors(self) -> bool {
        self.env_mode() == EnvMode::Invariant
    }

    /// The stiffness field is a search variable.
    fn evolves_material(self) -> bool {
        self == Paradigm::Invariant
    }
}

impl std::fmt::Display for Paradigm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Paradigm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Paradigm::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown paradigm `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub paradigm: Paradigm,
    pub population: usize,
    pub generations: usize,
    /// Survivor count; `None` keeps a quarter of the population (at least one).
    pub survivors: Option<usize>,
    pub grid_width: usize,
    pub grid_height: usize,
    /// Cell occupancy probability of the initial population.
    pub occupancy: f64,
    pub mutation_rate: f64,
    pub material_sigma: f64,
    pub local_search_iters: usize,
    /// Inner-loop training budget in updates.
    pub train_updates: usize,
    pub fine_tune_updates: usize,
    /// Invariant paradigm only: draw initial fields uniformly instead of 1.0.
    pub random_initial_stiffness: bool,
    /// Stiffness value the FixedMaterial ablation locks to.
    pub fixed_stiffness: f64,
    pub eval_episodes: usize,
    pub seed: u64,
    pub train: TrainConfig,
    pub env: EnvOptions,
    pub sim: SimParams,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            paradigm: Paradigm::Reactive,
            population: 8,
            generations: 5,
            survivors: None,
            grid_width: 5,
            grid_height: 5,
            occupancy: 0.6,
            mutation_rate: 0.1,
            material_sigma: 0.1,
            local_search_iters: 4,
            train_updates: 10,
            fine_tune_updates: 3,
            random_initial_stiffness: false,
            fixed_stiffness: 1.0,
            eval_episodes: 1,
            seed: 0,
            train: TrainConfig::default(),
            env: EnvOptions::default(),
            sim: SimParams::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn survivor_count(&self) -> usize {
        self.survivors
            .unwrap_or_else(|| (self.population as f64 * 0.25).ceil() as usize)
            .max(1)
    }

    /// Env options the paradigm trains and evaluates under.
    pub fn env_options(&self) -> EnvOptions {
        match self.paradigm {
            Paradigm::FixedMaterial => EnvOptions {
                stiffness_lock: Some(self.fixed_stiffness),
                ..self.env.clone()
            },
            _ => self.env.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), CodesignError> {
        let bad = |m: String| Err(CodesignError::Config(m));
        if self.population == 0 {
            return bad("population must be positive".into());
        }
        let k = self.survivor_count();
        if k > self.population {
            return bad(format!("survivor count {k} exceeds population {}", self.population));
        }
        if self.grid_width == 0 || self.grid_height == 0 {
            return bad("grid dimensions must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.occupancy) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("occupancy and mutation rate must lie in [0, 1]".into());
        }
        if !(self.material_sigma >= 0.0 && self.material_sigma.is_finite()) {
            return bad("material sigma must be finite and non-negative".into());
        }
        if self.eval_episodes == 0 {
            return bad("eval_episodes must be positive".into());
        }
        if !(crate::grid::STIFFNESS_MIN..=crate::grid::STIFFNESS_MAX).contains(&self.fixed_stiffness) {
            return bad("fixed stiffness must lie in [0.5, 2.0]".into());
        }
        self.train.validate()?;
        self.sim.validate().map_err(|e| CodesignError::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Individual {
    pub design: RobotDesign,
    pub controller: Option<PolicyParams>,
    pub fitness: Option<f64>,
    pub generation_born: usize,
    pub diverged: bool,
    /// Numeric form of the design id; keys the individual's RNG streams.
    pub serial: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub id: String,
    pub parent_id: Option<String>,
    pub fitness: f64,
    /// Design file path relative to the run directory.
    pub design: String,
    pub generation_born: usize,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub individuals: Vec<LogEntry>,
    pub best_id: String,
}

impl GenerationLog {
    pub fn best_fitness(&self) -> f64 {
        self.individuals.iter().map(|e| e.fitness).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_fitness(&self) -> f64 {
        self.individuals.iter().map(|e| e.fitness).sum::<f64>() / self.individuals.len().max(1) as f64
    }
}

pub fn design_ref(id: &str) -> String {
    format!("designs/{id}.json")
}
