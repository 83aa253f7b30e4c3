//! Gaussian MLP policy with a value head on the shared tanh trunk.
//!
//! Parameters live in one flat vector so the optimizer and the
//! finite-difference checks can treat them uniformly. Layout:
//! trunk layers, policy head, value head (each weights then biases, weights
//! row-major `[out][in]`), then the per-dimension log standard deviations.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ControlError;
use crate::rng::Rng;

const LOG_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
    /// Offset of the weight block in the flat parameter vector.
    pub offset: usize,
}

impl LayerShape {
    fn weight_len(&self) -> usize {
        self.inputs * self.outputs
    }

    fn len(&self) -> usize {
        self.weight_len() + self.outputs
    }

    fn bias_offset(&self) -> usize {
        self.offset + self.weight_len()
    }
}

/// Running mean/variance of observations (parallel Welford merge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsNormalizer {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: f64,
}

impl ObsNormalizer {
    pub const CLIP: f64 = 10.0;

    pub fn new(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            var: vec![1.0; dim],
            count: 0.0,
        }
    }

    pub fn normalize(&self, obs: &[f64]) -> Vec<f64> {
        obs.iter()
            .zip(self.mean.iter().zip(&self.var))
            .map(|(&x, (&m, &v))| ((x - m) / (v + 1e-8).sqrt()).clamp(-Self::CLIP, Self::CLIP))
            .collect()
    }

    pub fn update<'a>(&mut self, batch: impl IntoIterator<Item = &'a [f64]>) {
        let dim = self.mean.len();
        let mut n = 0.0;
        let mut mean = vec![0.0; dim];
        let mut m2 = vec![0.0; dim];
        for obs in batch {
            n += 1.0;
            for i in 0..dim {
                let d = obs[i] - mean[i];
                mean[i] += d / n;
                m2[i] += d * (obs[i] - mean[i]);
            }
        }
        if n == 0.0 {
            return;
        }
        let total = self.count + n;
        for i in 0..dim {
            let batch_var = m2[i] / n;
            let delta = mean[i] - self.mean[i];
            let new_mean = self.mean[i] + delta * n / total;
            let m_a = self.var[i] * self.count;
            let m_b = batch_var * n;
            let merged = m_a + m_b + delta * delta * self.count * n / total;
            self.mean[i] = new_mean;
            self.var[i] = merged / total;
        }
        self.count = total;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub hidden: Vec<usize>,
    trunk: Vec<LayerShape>,
    policy_head: LayerShape,
    value_head: LayerShape,
    log_std_offset: usize,
    pub params: Vec<f64>,
    pub obs_norm: ObsNormalizer,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input followed by each trunk layer's tanh output.
    pub activations: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub value: f64,
}

pub const DEFAULT_HIDDEN: [usize; 2] = [64, 64];

impl PolicyParams {
    /// All-zero parameters with the given shape.
    pub fn zeros(obs_dim: usize, act_dim: usize, hidden: &[usize]) -> Self {
        let mut offset = 0;
        let mut trunk = Vec::new();
        let mut prev = obs_dim;
        for &h in hidden {
            let l = LayerShape { inputs: prev, outputs: h, offset };
            offset += l.len();
            trunk.push(l);
            prev = h;
        }
        let policy_head = LayerShape { inputs: prev, outputs: act_dim, offset };
        offset += policy_head.len();
        let value_head = LayerShape { inputs: prev, outputs: 1, offset };
        offset += value_head.len();
        let log_std_offset = offset;
        offset += act_dim;
        Self {
            obs_dim,
            act_dim,
            hidden: hidden.to_vec(),
            trunk,
            policy_head,
            value_head,
            log_std_offset,
            params: vec![0.0; offset],
            obs_norm: ObsNormalizer::new(obs_dim),
        }
    }

    /// Gaussian fan-in initialisation; the policy head starts near zero so
    /// initial actions sit at the middle of their ranges.
    pub fn random(obs_dim: usize, act_dim: usize, hidden: &[usize], rng: &mut Rng) -> Self {
        let mut p = Self::zeros(obs_dim, act_dim, hidden);
        let mut fill = |params: &mut [f64], l: &LayerShape, gain: f64| {
            let scale = gain / (l.inputs.max(1) as f64).sqrt();
            for w in &mut params[l.offset..l.offset + l.weight_len()] {
                let z: f64 = rng.sample(StandardNormal);
                *w = scale * z;
            }
        };
        for l in p.trunk.clone() {
            fill(&mut p.params, &l, 1.0);
        }
        let (ph, vh) = (p.policy_head, p.value_head);
        fill(&mut p.params, &ph, 0.01);
        fill(&mut p.params, &vh, 1.0);
        let o = p.log_std_offset;
        p.params[o..o + act_dim].fill(-0.5);
        p
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// `[obs, hidden..., act]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut v = vec![self.obs_dim];
        v.extend(&self.hidden);
        v.push(self.act_dim);
        v
    }

    pub fn log_std(&self) -> &[f64] {
        &self.params[self.log_std_offset..self.log_std_offset + self.act_dim]
    }

    pub fn log_std_range(&self) -> std::ops::Range<usize> {
        self.log_std_offset..self.log_std_offset + self.act_dim
    }

    pub fn log_std_mut(&mut self) -> &mut [f64] {
        let o = self.log_std_offset;
        &mut self.params[o..o + self.act_dim]
    }

    /// Indices of parameters that only shape the action mean (trunk and
    /// policy head).
    pub fn mean_param_range(&self) -> std::ops::Range<usize> {
        0..self.value_head.offset
    }

    pub fn value_param_range(&self) -> std::ops::Range<usize> {
        self.value_head.offset..self.log_std_offset
    }

    pub fn layers(&self) -> impl Iterator<Item = &LayerShape> {
        self.trunk.iter().chain([&self.policy_head, &self.value_head])
    }

    fn dense(&self, l: &LayerShape, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let w = &self.params[l.offset..l.offset + l.weight_len()];
        let b = &self.params[l.bias_offset()..l.bias_offset() + l.outputs];
        for (o, row) in w.chunks_exact(l.inputs.max(1)).take(l.outputs).enumerate() {
            let mut acc = b[o];
            if l.inputs > 0 {
                for (wi, xi) in row.iter().zip(x) {
                    acc += wi * xi;
                }
            }
            out.push(acc);
        }
    }

    /// Forward pass on an already-normalized network input.
    pub fn forward(&self, input: &[f64]) -> Result<ForwardCache, ControlError> {
        if input.len() != self.obs_dim {
            return Err(ControlError::DimensionMismatch {
                what: "observation",
                expected: self.obs_dim,
                actual: input.len(),
            });
        }
        let mut activations = Vec::with_capacity(self.trunk.len() + 1);
        activations.push(input.to_vec());
        for l in &self.trunk {
            let mut z = Vec::with_capacity(l.outputs);
            self.dense(l, activations.last().expect("non-empty"), &mut z);
            z.iter_mut().for_each(|v| *v = v.tanh());
            activations.push(z);
        }
        let h = activations.last().expect("non-empty");
        let mut mean = Vec::with_capacity(self.act_dim);
        self.dense(&self.policy_head, h, &mut mean);
        let mut value = Vec::with_capacity(1);
        self.dense(&self.value_head, h, &mut value);
        Ok(ForwardCache {
            activations,
            mean,
            value: value[0],
        })
    }

    /// Accumulates parameter gradients into `grad` given dL/dmean and
    /// dL/dvalue. With `value_to_trunk == false` the value gradient stops at
    /// the value head.
    pub fn backward(&self, cache: &ForwardCache, d_mean: &[f64], d_value: f64, value_to_trunk: bool, grad: &mut [f64]) {
        let h = cache.activations.last().expect("non-empty");
        let mut d_h = vec![0.0; h.len()];
        self.dense_backward(&self.policy_head, h, d_mean, grad, Some(&mut d_h));
        if value_to_trunk {
            self.dense_backward(&self.value_head, h, &[d_value], grad, Some(&mut d_h));
        } else {
            self.dense_backward(&self.value_head, h, &[d_value], grad, None);
        }
        let mut delta = d_h;
        for (li, l) in self.trunk.iter().enumerate().rev() {
            let out = &cache.activations[li + 1];
            for (d, a) in delta.iter_mut().zip(out) {
                *d *= 1.0 - a * a;
            }
            let input = &cache.activations[li];
            if li > 0 {
                let mut d_in = vec![0.0; input.len()];
                self.dense_backward(l, input, &delta, grad, Some(&mut d_in));
                delta = d_in;
            } else {
                self.dense_backward(l, input, &delta, grad, None);
            }
        }
    }

    fn dense_backward(&self, l: &LayerShape, input: &[f64], d_out: &[f64], grad: &mut [f64], d_in: Option<&mut Vec<f64>>) {
        let w = &self.params[l.offset..l.offset + l.weight_len()];
        for (o, &g) in d_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let row = l.offset + o * l.inputs;
            for (i, &x) in input.iter().enumerate() {
                grad[row + i] += g * x;
            }
            grad[l.bias_offset() + o] += g;
        }
        if let Some(d_in) = d_in {
            for (o, &g) in d_out.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                let row = &w[o * l.inputs..(o + 1) * l.inputs];
                for (di, wi) in d_in.iter_mut().zip(row) {
                    *di += g * wi;
                }
            }
        }
    }

    /// Diagonal-Gaussian log density of `action` around `mean`.
    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        mean.iter()
            .zip(action)
            .zip(self.log_std())
            .map(|((&m, &a), &ls)| {
                let std = ls.exp();
                let z = if std > 0.0 { (a - m) / std } else { 0.0 };
                -0.5 * z * z - ls - 0.5 * LOG_2PI
            })
            .sum()
    }

    /// Entropy of the action distribution.
    pub fn entropy(&self) -> f64 {
        self.log_std().iter().map(|ls| ls + 0.5 * (LOG_2PI + 1.0)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

/// Output of one policy query on a raw observation.
#[derive(Debug, Clone)]
pub struct PolicyOutput {
    /// Observation after normalization: what the network actually saw.
    pub net_input: Vec<f64>,
    pub raw_action: Vec<f64>,
    pub log_prob: f64,
    pub value: f64,
}

/// Normalizes `obs`, runs the network and either returns the Gaussian mean
/// (`stochastic == false`) or samples around it.
pub fn policy_forward(params: &PolicyParams, obs: &[f64], stochastic: bool, rng: &mut Rng) -> Result<PolicyOutput, ControlError> {
    if obs.len() != params.obs_dim {
        return Err(ControlError::DimensionMismatch {
            what: "observation",
            expected: params.obs_dim,
            actual: obs.len(),
        });
    }
    let net_input = params.obs_norm.normalize(obs);
    let cache = params.forward(&net_input)?;
    let raw_action: Vec<f64> = if stochastic {
        cache
            .mean
            .iter()
            .zip(params.log_std())
            .map(|(&m, &ls)| {
                let z: f64 = rng.sample(StandardNormal);
                m + ls.exp() * z
            })
            .collect()
    } else {
        cache.mean.clone()
    };
    let log_prob = params.log_prob(&cache.mean, &raw_action);
    Ok(PolicyOutput {
        net_input,
        raw_action,
        log_prob,
        value: cache.value,
    })
}
