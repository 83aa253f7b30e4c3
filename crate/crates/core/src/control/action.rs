use super::ControlError;
use crate::env::{Env, EnvMode};
use crate::grid::{STIFFNESS_MAX, STIFFNESS_MIN};
use crate::physics::{ACTUATION_MAX, ACTUATION_MIN};

#[derive(Debug, Clone, PartialEq)]
pub struct MappedAction {
    pub actuation: Vec<f64>,
    pub stiffness: Option<Vec<f64>>,
}

impl MappedAction {
    /// Physical command vector in env order: actuation, then stiffness.
    pub fn to_command(&self) -> Vec<f64> {
        let mut v = self.actuation.clone();
        if let Some(s) = &self.stiffness {
            v.extend_from_slice(s);
        }
        v
    }
}

#[inline]
fn squash(raw: f64, lo: f64, hi: f64) -> f64 {
    let t = raw.tanh();
    if t <= -1.0 {
        lo
    } else if t >= 1.0 {
        hi
    } else {
        0.5 * (lo + hi) + 0.5 * (hi - lo) * t
    }
}

pub fn map_action(raw: &[f64], mode: EnvMode, n_actuators: usize, n_occupied: usize) -> Result<MappedAction, ControlError> {
    let n_stiffness = match mode {
        EnvMode::Reactive => n_occupied,
        EnvMode::Invariant => 0,
    };
    map_split(raw, n_actuators, n_stiffness).map(|(actuation, stiffness)| MappedAction {
        actuation,
        stiffness: (mode == EnvMode::Reactive).then_some(stiffness),
    })
}

fn map_split(raw: &[f64], n_actuators: usize, n_stiffness: usize) -> Result<(Vec<f64>, Vec<f64>), ControlError> {
    let expected = n_actuators + n_stiffness;
    if raw.len() != expected {
        return Err(ControlError::DimensionMismatch {
            what: "action",
            expected,
            actual: raw.len(),
        });
    }
    let (a, s) = raw.split_at(n_actuators);
    Ok((
        a.iter().map(|&r| squash(r, ACTUATION_MIN, ACTUATION_MAX)).collect(),
        s.iter().map(|&r| squash(r, STIFFNESS_MIN, STIFFNESS_MAX)).collect(),
    ))
}

/// Maps a raw policy output to the command vector `env.step` expects,
/// honouring a stiffness lock (which removes the stiffness channels).
pub fn env_command(env: &Env, raw: &[f64]) -> Result<Vec<f64>, ControlError> {
    let n_act = env.n_actuators();
    let (mut a, s) = map_split(raw, n_act, env.action_dim() - n_act)?;
    a.extend(s);
    Ok(a)
}
