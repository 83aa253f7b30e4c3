//! Inner loop of co-design: everything that runs on one fixed design.

use super::operators::mutate_material;
use super::CodesignError;
use crate::control::{collect_rollout, run_episode, PolicyParams, PpoTrainer, TrainConfig};
use crate::env::{make_env, Env, EnvMode, EnvOptions, TaskSpec};
use crate::grid::{RobotDesign, StiffnessField};
use crate::physics::SimParams;
use crate::rng::{self, stream};

/// Everything the inner loop needs besides the design and its controller.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerContext {
    pub task: TaskSpec,
    pub mode: EnvMode,
    pub options: EnvOptions,
    pub sim: SimParams,
    pub train: TrainConfig,
    pub eval_episodes: usize,
    /// Base seed of the fixed evaluation episodes.
    pub eval_seed: u64,
}

impl InnerContext {
    pub fn new(task: TaskSpec, mode: EnvMode) -> Self {
        Self {
            task,
            mode,
            options: EnvOptions::default(),
            sim: SimParams::default(),
            train: TrainConfig::default(),
            eval_episodes: 1,
            eval_seed: 0,
        }
    }

    pub fn make_env(&self, design: &RobotDesign, seed: u64) -> Result<Env, CodesignError> {
        Ok(make_env(&self.task, design, self.mode, &self.options, &self.sim, seed)?)
    }

    fn eval_envs(&self, design: &RobotDesign) -> Result<Vec<Env>, CodesignError> {
        (0..self.eval_episodes.max(1) as u64)
            .map(|e| self.make_env(design, rng::derive_seed(self.eval_seed, &[stream::EVALUATE, e])))
            .collect()
    }

    pub fn fresh_policy(&self, env: &Env, seed: u64) -> PolicyParams {
        PolicyParams::random(env.observation_dim(), env.action_dim(), &self.train.hidden, &mut rng::seeded(seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    /// At least one evaluation episode diverged (its truncated return counts).
    pub diverged: bool,
}

fn evaluate_on(envs: &mut [Env], controller: &PolicyParams) -> Result<Evaluation, CodesignError> {
    let mut total = 0.0;
    let mut diverged = false;
    // deterministic policy: the rng is never drawn from
    let mut unused = rng::seeded(0);
    for env in envs.iter_mut() {
        let (ret, d) = run_episode(env, controller, false, &mut unused)?;
        total += ret;
        diverged |= d;
    }
    Ok(Evaluation {
        fitness: total / envs.len() as f64,
        diverged,
    })
}

/// Mean deterministic return over the context's fixed evaluation episodes.
pub fn evaluate(design: &RobotDesign, controller: &PolicyParams, ctx: &InnerContext) -> Result<Evaluation, CodesignError> {
    let mut envs = ctx.eval_envs(design)?;
    evaluate_on(&mut envs, controller)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Best-evaluated snapshot, including the starting policy.
    pub controller: PolicyParams,
    pub evaluation: Evaluation,
    pub initial_fitness: f64,
    pub updates: usize,
    pub diverged_rollouts: usize,
    pub non_finite_updates: usize,
}

/// Runs `budget` collect/update rounds from `init` (or a fresh policy) and
/// keeps the best snapshot under deterministic evaluation.
pub fn train_inner(
    design: &RobotDesign,
    ctx: &InnerContext,
    budget: usize,
    seed: u64,
    init: Option<PolicyParams>,
) -> Result<TrainOutcome, CodesignError> {
    let mut env = ctx.make_env(design, seed)?;
    let mut eval_envs = ctx.eval_envs(design)?;
    let mut params = match init {
        Some(p) => {
            if p.obs_dim != env.observation_dim() || p.act_dim != env.action_dim() {
                return Err(CodesignError::Config(format!(
                    "inherited controller is {}->{}, env needs {}->{}",
                    p.obs_dim,
                    p.act_dim,
                    env.observation_dim(),
                    env.action_dim()
                )));
            }
            p
        }
        None => ctx.fresh_policy(&env, rng::derive_seed(seed, &[stream::INIT_CONTROLLER])),
    };
    let mut best = params.clone();
    let mut best_eval = evaluate_on(&mut eval_envs, &params)?;
    let initial_fitness = best_eval.fitness;
    let mut trainer = PpoTrainer::new(ctx.train.clone(), &params)?;
    let mut rng = rng::derived(seed, &[stream::TRAIN]);
    let mut diverged_rollouts = 0;
    let mut non_finite_updates = 0;

    for u in 0..budget {
        let mut traj = collect_rollout(&mut env, &params, ctx.train.rollout_ticks, true, &mut rng)?;
        if traj.any_diverged() {
            diverged_rollouts += 1;
            log::warn!("design {}: rollout diverged in update {u}; retrying with a perturbed seed", design.id);
            env.reset();
            let mut retry_rng = rng::derived(seed, &[stream::TRAIN, u as u64 + 1]);
            traj = collect_rollout(&mut env, &params, ctx.train.rollout_ticks, true, &mut retry_rng)?;
            if traj.any_diverged() {
                diverged_rollouts += 1;
            }
        }
        params.obs_norm.update(traj.raw_observations.iter().map(Vec::as_slice));
        let (next, stats) = trainer.update(&params, &[traj], &mut rng)?;
        if stats.non_finite_gradient {
            non_finite_updates += 1;
            continue;
        }
        params = next;
        let e = evaluate_on(&mut eval_envs, &params)?;
        if e.fitness > best_eval.fitness {
            best = params.clone();
            best_eval = e;
        }
    }
    Ok(TrainOutcome {
        controller: best,
        evaluation: best_eval,
        initial_fitness,
        updates: budget,
        diverged_rollouts,
        non_finite_updates,
    })
}

#[derive(Debug, Clone)]
pub struct LocalSearchOutcome {
    pub stiffness: StiffnessField,
    pub evaluation: Evaluation,
    pub initial_fitness: f64,
    pub accepted: usize,
}

/// Hill climbing over the stiffness field with a frozen controller: perturb,
/// evaluate zero-shot, keep only strict improvements.
pub fn material_local_search(
    design: &RobotDesign,
    controller: &PolicyParams,
    ctx: &InnerContext,
    iters: usize,
    sigma: f64,
    seed: u64,
) -> Result<LocalSearchOutcome, CodesignError> {
    let mut incumbent = design.clone();
    let mut best = evaluate(&incumbent, controller, ctx)?;
    let initial_fitness = best.fitness;
    let mut rng = rng::derived(seed, &[stream::LOCAL_SEARCH]);
    let mut accepted = 0;
    for _ in 0..iters {
        let candidate = RobotDesign {
            stiffness: mutate_material(&incumbent.stiffness, sigma, &mut rng),
            ..incumbent.clone()
        };
        let e = evaluate(&candidate, controller, ctx)?;
        if e.fitness > best.fitness {
            incumbent = candidate;
            best = e;
            accepted += 1;
        }
    }
    Ok(LocalSearchOutcome {
        stiffness: incumbent.stiffness,
        evaluation: best,
        initial_fitness,
        accepted,
    })
}
