use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{read_file, write_file, ExperimentError};
use crate::control::{env_command, policy_forward, Checkpoint};
use crate::env::{make_env, EnvOptions, TaskId, TaskSpec};
use crate::grid::{deserialize_design, GridError, RobotDesign};
use crate::physics::{write_position_rows, write_stiffness_rows, SimParams, POSITION_HEADER, STIFFNESS_HEADER};
use crate::rng;

pub const ACTUATION_HEADER: &str = "t,actuator,ratio";

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayRequest {
    pub design: PathBuf,
    pub checkpoint: PathBuf,
    pub task: TaskId,
    /// Control ticks to run.
    pub steps: usize,
    pub out_dir: PathBuf,
    pub sim: SimParams,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutput {
    pub positions: PathBuf,
    pub stiffness: PathBuf,
    pub actuation: PathBuf,
    pub ticks: usize,
    pub total_reward: f64,
}

pub(crate) fn load_design(path: &Path) -> Result<RobotDesign, ExperimentError> {
    deserialize_design(&read_file(path)?).map_err(|e| match e {
        GridError::Validation(_) => ExperimentError::InvalidDesign(e),
        other => ExperimentError::Config(format!("{}: {other}", path.display())),
    })
}

/// Deterministic rollout of a checkpoint on a design. Positions are dumped
/// at spawn and after every tick; stiffness and actuation after every tick.
pub fn replay(req: &ReplayRequest) -> Result<ReplayOutput, ExperimentError> {
    let design = load_design(&req.design)?;
    let ck = Checkpoint::load(&req.checkpoint).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let params = ck.to_params().map_err(|e| ExperimentError::Config(e.to_string()))?;
    let spec = TaskSpec::new(req.task).with_episode_length(req.steps.max(1));
    let mut env = make_env(&spec, &design, ck.mode, &ck.env_options(&EnvOptions::default()), &req.sim, req.seed)?;
    if params.obs_dim != env.observation_dim() || params.act_dim != env.action_dim() {
        return Err(ExperimentError::IncompatibleController(format!(
            "policy maps {} observations to {} actions; design {} in {:?} mode needs {} -> {}",
            params.obs_dim,
            params.act_dim,
            design.id,
            ck.mode,
            env.observation_dim(),
            env.action_dim()
        )));
    }

    let mut positions = format!("{POSITION_HEADER}\n").into_bytes();
    let mut stiffness = format!("{STIFFNESS_HEADER}\n").into_bytes();
    let mut actuation = format!("{ACTUATION_HEADER}\n");
    write_position_rows(&mut positions, env.state()).expect("writing to memory");

    // the policy is deterministic; this stream is never drawn from
    let mut unused = rng::seeded(0);
    let mut obs = env.build_observation();
    let mut ticks = 0;
    let mut total_reward = 0.0;
    while ticks < req.steps {
        let out = policy_forward(&params, &obs, false, &mut unused)?;
        let command = env_command(&env, &out.raw_action)?;
        let step = env.step(&command)?;
        ticks += 1;
        total_reward += step.reward;
        let t = env.state().t;
        write_position_rows(&mut positions, env.state()).expect("writing to memory");
        write_stiffness_rows(&mut stiffness, t, env.system()).expect("writing to memory");
        for (a, c) in command[..env.n_actuators()].iter().enumerate() {
            let _ = writeln!(actuation, "{t},{a},{c}");
        }
        if step.done {
            if step.diverged {
                log::warn!("replay diverged after {ticks} ticks");
            }
            break;
        }
        obs = step.observation;
    }

    let out = ReplayOutput {
        positions: req.out_dir.join("positions.csv"),
        stiffness: req.out_dir.join("stiffness.csv"),
        actuation: req.out_dir.join("actuation.csv"),
        ticks,
        total_reward,
    };
    write_file(&out.positions, positions)?;
    write_file(&out.stiffness, stiffness)?;
    write_file(&out.actuation, actuation)?;
    Ok(out)
}
