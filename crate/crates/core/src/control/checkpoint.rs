//! Versioned JSON checkpoints of a trained policy plus the env interface it
//! was trained against.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::policy::{ObsNormalizer, PolicyParams};
use super::ControlError;
use crate::env::{EnvMode, EnvOptions};

pub const CHECKPOINT_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    /// Row-major `[outputs][inputs]`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    pub mode: EnvMode,
    pub stiffness_lock: Option<f64>,
    pub observe_stiffness: bool,
    /// `[obs, hidden..., act]`.
    pub layer_sizes: Vec<usize>,
    /// Trunk layers followed by the action-mean head.
    pub layers: Vec<LayerWeights>,
    pub value_head: LayerWeights,
    pub log_std: Vec<f64>,
    pub obs_norm: ObsNormalizer,
}

impl Checkpoint {
    pub fn new(params: &PolicyParams, mode: EnvMode, options: &EnvOptions) -> Self {
        let blocks: Vec<LayerWeights> = params
            .layers()
            .map(|l| {
                let w_end = l.offset + l.inputs * l.outputs;
                LayerWeights {
                    weights: params.params[l.offset..w_end].to_vec(),
                    biases: params.params[w_end..w_end + l.outputs].to_vec(),
                }
            })
            .collect();
        let (layers, value) = blocks.split_at(blocks.len() - 1);
        Self {
            format: CHECKPOINT_FORMAT,
            mode,
            stiffness_lock: options.stiffness_lock,
            observe_stiffness: options.observe_stiffness,
            layer_sizes: params.layer_sizes(),
            layers: layers.to_vec(),
            value_head: value[0].clone(),
            log_std: params.log_std().to_vec(),
            obs_norm: params.obs_norm.clone(),
        }
    }

    pub fn to_params(&self) -> Result<PolicyParams, ControlError> {
        let bad = |m: String| ControlError::Checkpoint(m);
        if self.format != CHECKPOINT_FORMAT {
            return Err(bad(format!("unsupported checkpoint format {}", self.format)));
        }
        if self.layer_sizes.len() < 2 {
            return Err(bad("layer_sizes needs at least input and output".into()));
        }
        let obs = self.layer_sizes[0];
        let act = *self.layer_sizes.last().expect("len >= 2");
        let hidden = &self.layer_sizes[1..self.layer_sizes.len() - 1];
        let mut p = PolicyParams::zeros(obs, act, hidden);
        let shapes: Vec<_> = p.layers().copied().collect();
        let blocks = self.layers.iter().chain(std::iter::once(&self.value_head));
        if self.layers.len() + 1 != shapes.len() {
            return Err(bad(format!("expected {} weight layers, found {}", shapes.len() - 1, self.layers.len())));
        }
        for (l, b) in shapes.iter().zip(blocks) {
            if b.weights.len() != l.inputs * l.outputs || b.biases.len() != l.outputs {
                return Err(bad(format!("layer at offset {} has the wrong shape", l.offset)));
            }
            let w_end = l.offset + b.weights.len();
            p.params[l.offset..w_end].copy_from_slice(&b.weights);
            p.params[w_end..w_end + l.outputs].copy_from_slice(&b.biases);
        }
        if self.log_std.len() != act {
            return Err(bad("log_std length differs from the action dimension".into()));
        }
        p.log_std_mut().copy_from_slice(&self.log_std);
        if self.obs_norm.mean.len() != obs || self.obs_norm.var.len() != obs {
            return Err(bad("observation normalizer length differs from the input size".into()));
        }
        p.obs_norm = self.obs_norm.clone();
        if !p.is_finite() {
            return Err(bad("non-finite parameters".into()));
        }
        Ok(p)
    }

    /// Env options matching the interface this policy was trained on.
    pub fn env_options(&self, base: &EnvOptions) -> EnvOptions {
        EnvOptions {
            stiffness_lock: self.stiffness_lock,
            observe_stiffness: self.observe_stiffness,
            ..base.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ControlError> {
        serde_json::from_str(text).map_err(|e| ControlError::Checkpoint(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, ControlError> {
        let text = std::fs::read_to_string(path).map_err(|e| ControlError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
