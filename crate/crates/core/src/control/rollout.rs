use super::action::env_command;
use super::policy::{policy_forward, PolicyParams};
use super::ControlError;
use crate::env::Env;
use crate::rng::Rng;

/// Per-tick record of one collection run. Episodes may be concatenated;
/// `dones[t]` marks the last tick of each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    /// Normalized observations, as fed to the network.
    pub observations: Vec<Vec<f64>>,
    /// Observations before normalization.
    pub raw_observations: Vec<Vec<f64>>,
    pub raw_actions: Vec<Vec<f64>>,
    pub mapped_actions: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub diverged: Vec<bool>,
    /// Value of the state after the final tick, for bootstrapping; 0 when
    /// the final tick ended an episode.
    pub last_value: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn any_diverged(&self) -> bool {
        self.diverged.iter().any(|&d| d)
    }

    /// Undiscounted return of every completed episode.
    pub fn episode_returns(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        for (r, &d) in self.rewards.iter().zip(&self.dones) {
            acc += r;
            if d {
                out.push(acc);
                acc = 0.0;
            }
        }
        out
    }
}

/// Runs `n_ticks` control ticks, resetting the env whenever an episode ends.
pub fn collect_rollout(env: &mut Env, params: &PolicyParams, n_ticks: usize, stochastic: bool, rng: &mut Rng) -> Result<Trajectory, ControlError> {
    let mut traj = Trajectory::default();
    let mut obs = if env.is_finished() { env.reset() } else { env.build_observation() };
    for _ in 0..n_ticks {
        let out = policy_forward(params, &obs, stochastic, rng)?;
        let command = env_command(env, &out.raw_action)?;
        let step = env.step(&command)?;
        traj.observations.push(out.net_input);
        traj.raw_observations.push(std::mem::take(&mut obs));
        traj.raw_actions.push(out.raw_action);
        traj.mapped_actions.push(command);
        traj.log_probs.push(out.log_prob);
        traj.rewards.push(step.reward);
        traj.values.push(out.value);
        traj.dones.push(step.done);
        traj.diverged.push(step.diverged);
        obs = if step.done { env.reset() } else { step.observation };
    }
    if traj.dones.last().is_some_and(|&d| !d) {
        let input = params.obs_norm.normalize(&obs);
        traj.last_value = params.forward(&input)?.value;
    }
    Ok(traj)
}

/// Runs one full episode from reset and returns its undiscounted return and
/// whether it diverged.
pub fn run_episode(env: &mut Env, params: &PolicyParams, stochastic: bool, rng: &mut Rng) -> Result<(f64, bool), ControlError> {
    let mut obs = env.reset();
    let mut total = 0.0;
    loop {
        let out = policy_forward(params, &obs, stochastic, rng)?;
        let command = env_command(env, &out.raw_action)?;
        let step = env.step(&command)?;
        total += step.reward;
        if step.done {
            return Ok((total, step.diverged));
        }
        obs = step.observation;
    }
}
