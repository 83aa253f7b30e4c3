//! Policy network, action mapping, rollouts, advantage estimation and the
//! clipped-surrogate trainer.

mod action;
mod checkpoint;
mod gae;
mod policy;
mod ppo;
mod rollout;

use thiserror::Error;

pub use action::{env_command, map_action, MappedAction};
pub use checkpoint::{Checkpoint, LayerWeights, CHECKPOINT_FORMAT};
pub use gae::{gae_advantages, normalize_advantages};
pub use policy::{policy_forward, ForwardCache, LayerShape, ObsNormalizer, PolicyOutput, PolicyParams, DEFAULT_HIDDEN};
pub use ppo::{build_samples, loss_and_grad, ppo_update, Adam, LossTerms, PpoTrainer, Sample, TrainConfig, UpdateStats};
pub use rollout::{collect_rollout, run_episode, Trajectory};

use crate::env::EnvError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("{what} has {actual} components, expected {expected}")]
    DimensionMismatch { what: &'static str, expected: usize, actual: usize },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("empty training batch")]
    EmptyBatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
