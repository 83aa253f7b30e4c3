//! Episodic task environments over the mass-spring engine.
//!
//! One control tick runs `control_decimation` physics steps. Locomotion tasks
//! reward the centre-of-mass x displacement of the tick; shape tasks reward
//! the change in enclosed area relative to the area at reset.

mod task;

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use task::{CaveGeometry, TaskId, TaskSpec, UnknownTask, DEFAULT_EPISODE_LENGTH};

use crate::grid::RobotDesign;
use crate::physics::{self, MassSpringSystem, PhysicsError, SimParams, SimState};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvMode {
    /// Stiffness factors arrive with every action.
    Reactive,
    /// Stiffness is fixed by the design at assembly.
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvOptions {
    /// Reactive mode only: pin every stiffness channel to this value and
    /// drop the stiffness part of the action.
    pub stiffness_lock: Option<f64>,
    /// Reactive mode only: append the current stiffness factors to the
    /// observation.
    pub observe_stiffness: bool,
    /// Physics steps spent settling the robot at spawn; 0 starts at rest
    /// with the lattice undeformed.
    pub settle_steps: usize,
    pub settle_tolerance: f64,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self {
            stiffness_lock: None,
            observe_stiffness: true,
            settle_steps: 20_000,
            settle_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error("robot intersects the terrain at spawn (mass {mass} at ({x:.3}, {y:.3}))")]
    SpawnCollision { mass: usize, x: f64, y: f64 },
    #[error("action has {actual} components, env expects {expected}")]
    ActionDimension { expected: usize, actual: usize },
    #[error("episode already finished; call reset")]
    EpisodeFinished,
    #[error("invalid task: {0}")]
    InvalidTask(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// The tick ended in a non-finite state; reward is 0 and the episode is over.
    pub diverged: bool,
    pub info: BTreeMap<&'static str, f64>,
}

pub struct Env {
    task: TaskSpec,
    mode: EnvMode,
    options: EnvOptions,
    params: SimParams,
    seed: u64,
    start_system: MassSpringSystem,
    start_state: SimState,
    system: MassSpringSystem,
    state: SimState,
    tick: usize,
    finished: bool,
    initial_area: f64,
    com_x: f64,
    area: f64,
    /// Stiffness commands issued each tick (reactive mode), most recent last.
    stiffness_log: Option<Vec<Vec<f64>>>,
}

pub fn make_env(
    task: &TaskSpec,
    design: &RobotDesign,
    mode: EnvMode,
    options: &EnvOptions,
    params: &SimParams,
    seed: u64,
) -> Result<Env, EnvError> {
    if task.episode_length == 0 {
        return Err(EnvError::InvalidTask("episode_length must be > 0".into()));
    }
    if !task.ground.floor.is_finite() || task.ground.ceiling.as_ref().is_some_and(|c| !c.is_finite()) {
        return Err(EnvError::InvalidTask("terrain heights must be finite".into()));
    }
    let mut system = MassSpringSystem::assemble(design, params)?;

    let jitter = if task.spawn_jitter > 0.0 {
        rng::seeded(seed).random_range(0.0..task.spawn_jitter)
    } else {
        0.0
    };
    let (min_x, max_x, min_y) = system.masses.iter().fold((f64::MAX, f64::MIN, f64::MAX), |(a, b, c), m| {
        (a.min(m.rest_position[0]), b.max(m.rest_position[0]), c.min(m.rest_position[1]))
    });
    let left = task.spawn_x + jitter;
    let floor = task.ground.floor.max_over(left, left + (max_x - min_x));
    let offset = [left - min_x, floor - min_y];
    let mut state = SimState::at_rest(&system, offset);

    if let Some(ceiling) = &task.ground.ceiling {
        for (i, p) in state.positions.iter().enumerate() {
            if p[1] >= ceiling.height_at(p[0]) {
                return Err(EnvError::SpawnCollision { mass: i, x: p[0], y: p[1] });
            }
        }
    }

    if options.settle_steps > 0 {
        let out = physics::settle(&mut system, state, params, &task.ground, options.settle_steps, options.settle_tolerance)?;
        if !out.converged {
            log::debug!("spawn settle stopped after {} steps without converging", out.steps);
        }
        state = out.state;
        state.t = 0.0;
        state.step_count = 0;
    }

    let area = system.area(&state.positions);
    let com_x = system.center_of_mass(&state.positions)[0];
    let stiffness_log = (mode == EnvMode::Reactive).then(Vec::new);
    Ok(Env {
        task: task.clone(),
        mode,
        options: options.clone(),
        params: params.clone(),
        seed,
        start_system: system.clone(),
        start_state: state.clone(),
        system,
        state,
        tick: 0,
        finished: false,
        initial_area: area,
        com_x,
        area,
        stiffness_log,
    })
}

impl Env {
    pub fn reset(&mut self) -> Vec<f64> {
        self.system = self.start_system.clone();
        self.state = self.start_state.clone();
        self.tick = 0;
        self.finished = false;
        self.com_x = self.system.center_of_mass(&self.state.positions)[0];
        self.area = self.initial_area;
        if let Some(log) = &mut self.stiffness_log {
            log.clear();
        }
        self.build_observation()
    }

    pub fn mode(&self) -> EnvMode {
        self.mode
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn options(&self) -> &EnvOptions {
        &self.options
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn system(&self) -> &MassSpringSystem {
        &self.system
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    /// Mutable access for diagnostics and tests; observations are derived
    /// from this state.
    pub fn state_mut(&mut self) -> &mut SimState {
        &mut self.state
    }

    pub fn tick(&self) -> usize {
        self.tick
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn n_actuators(&self) -> usize {
        self.system.n_actuators()
    }

    pub fn n_occupied(&self) -> usize {
        self.system.n_occupied()
    }

    fn stiffness_channels(&self) -> usize {
        match (self.mode, self.options.stiffness_lock) {
            (EnvMode::Reactive, None) => self.n_occupied(),
            _ => 0,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.n_actuators() + self.stiffness_channels()
    }

    fn observes_stiffness(&self) -> bool {
        self.mode == EnvMode::Reactive && self.options.observe_stiffness
    }

    pub fn observation_dim(&self) -> usize {
        2 * self.system.n_masses()
            + 2
            + self.task.terrain_probes.len()
            + if self.observes_stiffness() { self.n_occupied() } else { 0 }
    }

    pub fn initial_area(&self) -> f64 {
        self.initial_area
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn center_of_mass(&self) -> [f64; 2] {
        self.system.center_of_mass(&self.state.positions)
    }

    /// Stiffness fields applied so far this episode (reactive mode).
    pub fn stiffness_log(&self) -> Option<&[Vec<f64>]> {
        self.stiffness_log.as_deref()
    }

    /// Body-frame corner positions, centre-of-mass velocity, terrain probes
    /// relative to the centre of mass, and (reactive) current stiffness.
    pub fn build_observation(&self) -> Vec<f64> {
        let mut obs = Vec::with_capacity(self.observation_dim());
        let com = self.center_of_mass();
        for p in &self.state.positions {
            obs.push(p[0] - com[0]);
            obs.push(p[1] - com[1]);
        }
        let total = self.system.total_mass();
        let mut v = [0.0; 2];
        for (m, vel) in self.system.masses.iter().zip(&self.state.velocities) {
            v[0] += m.mass * vel[0];
            v[1] += m.mass * vel[1];
        }
        obs.push(v[0] / total);
        obs.push(v[1] / total);
        for &probe in &self.task.terrain_probes {
            let x = com[0] + probe * self.params.voxel_size;
            obs.push(self.task.ground.floor.height_at(x) - com[1]);
        }
        if self.observes_stiffness() {
            obs.extend_from_slice(self.system.stiffness_factors());
        }
        obs
    }

    /// Runs one control tick. `action` holds physical commands: actuation
    /// ratios first, then (reactive, unlocked) per-voxel stiffness factors.
    pub fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        let expected = self.action_dim();
        if action.len() != expected {
            return Err(EnvError::ActionDimension {
                expected,
                actual: action.len(),
            });
        }
        let n_act = self.n_actuators();
        let (motor, stiffness) = action.split_at(n_act);
        if self.mode == EnvMode::Reactive {
            let field = match self.options.stiffness_lock {
                Some(v) => vec![v; self.n_occupied()],
                None => stiffness.to_vec(),
            };
            self.system.set_reactive_stiffness(&field)?;
            if let Some(log) = &mut self.stiffness_log {
                log.push(self.system.stiffness_factors().to_vec());
            }
        }

        let snapshot = self.state.clone();
        let mut diverged = false;
        for _ in 0..self.params.control_decimation {
            match physics::step(&mut self.system, &mut self.state, motor, &self.params, &self.task.ground) {
                Ok(()) => {}
                Err(PhysicsError::SimulationDiverged { step, mass }) => {
                    log::warn!("simulation diverged at step {step} (mass {mass}); ending episode");
                    diverged = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        self.tick += 1;

        let reward = if diverged {
            self.state = snapshot;
            0.0
        } else {
            let com_x = self.system.center_of_mass(&self.state.positions)[0];
            let area = self.system.area(&self.state.positions);
            let r = match self.task.task {
                TaskId::AreaMaximizer => (area - self.area) / self.initial_area,
                TaskId::AreaMinimizer => -(area - self.area) / self.initial_area,
                _ => com_x - self.com_x,
            };
            self.com_x = com_x;
            self.area = area;
            r
        };
        let done = diverged || self.tick >= self.task.episode_length;
        self.finished = done;

        let mut info = BTreeMap::new();
        info.insert("com_x", self.com_x);
        info.insert("area", self.area);
        info.insert("tick", self.tick as f64);
        info.insert("diverged", if diverged { 1.0 } else { 0.0 });
        Ok(StepResult {
            observation: self.build_observation(),
            reward,
            done,
            diverged,
            info,
        })
    }
}
