//! Clipped-surrogate policy gradient with a shared-trunk value head.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::gae::{gae_advantages, normalize_advantages};
use super::policy::{PolicyParams, DEFAULT_HIDDEN};
use super::rollout::Trajectory;
use super::ControlError;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub clip: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub rollout_ticks: usize,
    pub total_updates: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Global gradient-norm ceiling; non-positive disables clipping.
    pub max_grad_norm: f64,
    /// When false the value loss only trains the value head.
    pub value_to_trunk: bool,
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lambda: 0.95,
            clip: 0.2,
            learning_rate: 3e-4,
            epochs: 4,
            minibatch_size: 64,
            rollout_ticks: 2048,
            total_updates: 50,
            value_coef: 0.5,
            entropy_coef: 0.01,
            max_grad_norm: 0.5,
            value_to_trunk: true,
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |m: &str| Err(ControlError::InvalidConfig(m.to_string()));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda must lie in [0, 1]");
        }
        if !(self.clip > 0.0) {
            return bad("clip ratio must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if self.minibatch_size == 0 {
            return bad("minibatch size must be positive");
        }
        Ok(())
    }
}

/// One training sample after advantage estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// Flattens trajectories into samples with per-batch normalized advantages.
pub fn build_samples(batch: &[Trajectory], gamma: f64, lambda: f64) -> Vec<Sample> {
    let mut samples = Vec::new();
    for traj in batch {
        let (adv, ret) = gae_advantages(traj, gamma, lambda);
        for t in 0..traj.len() {
            samples.push(Sample {
                obs: traj.observations[t].clone(),
                action: traj.raw_actions[t].clone(),
                old_log_prob: traj.log_probs[t],
                advantage: adv[t],
                ret: ret[t],
            });
        }
    }
    let mut adv: Vec<f64> = samples.iter().map(|s| s.advantage).collect();
    normalize_advantages(&mut adv);
    for (s, a) in samples.iter_mut().zip(adv) {
        s.advantage = a;
    }
    samples
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossTerms {
    /// Mean clipped surrogate (to be maximized).
    pub surrogate: f64,
    /// Mean unclipped surrogate, for diagnostics.
    pub unclipped: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// Minimized objective: −surrogate + c_v·value_loss − c_e·entropy.
    pub total: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Loss over `samples` and its gradient with respect to the flat parameters.
pub fn loss_and_grad(params: &PolicyParams, samples: &[Sample], cfg: &TrainConfig) -> Result<(LossTerms, Vec<f64>), ControlError> {
    let mut grad = vec![0.0; params.n_params()];
    let mut terms = LossTerms::default();
    if samples.is_empty() {
        return Ok((terms, grad));
    }
    let n = samples.len() as f64;
    let log_std = params.log_std().to_vec();
    let inv_var: Vec<f64> = log_std.iter().map(|ls| (-2.0 * ls).exp()).collect();
    let mut d_log_std = vec![0.0; params.act_dim];
    let (lo, hi) = (1.0 - cfg.clip, 1.0 + cfg.clip);
    let mut clipped = 0usize;

    for s in samples {
        let cache = params.forward(&s.obs)?;
        let logp = params.log_prob(&cache.mean, &s.action);
        let ratio = (logp - s.old_log_prob).exp();
        let unclipped = ratio * s.advantage;
        let clipped_term = ratio.clamp(lo, hi) * s.advantage;
        let obj = unclipped.min(clipped_term);
        if ratio < lo || ratio > hi {
            clipped += 1;
        }
        terms.surrogate += obj / n;
        terms.unclipped += unclipped / n;
        terms.approx_kl += (s.old_log_prob - logp) / n;
        let verr = cache.value - s.ret;
        terms.value_loss += verr * verr / n;

        // d(total)/d(logp): only the unclipped branch carries gradient.
        let d_logp = if unclipped <= clipped_term { -unclipped / n } else { 0.0 };
        let d_mean: Vec<f64> = (0..params.act_dim)
            .map(|j| d_logp * (s.action[j] - cache.mean[j]) * inv_var[j])
            .collect();
        for j in 0..params.act_dim {
            let z2 = (s.action[j] - cache.mean[j]).powi(2) * inv_var[j];
            d_log_std[j] += d_logp * (z2 - 1.0);
        }
        let d_value = cfg.value_coef * 2.0 * verr / n;
        params.backward(&cache, &d_mean, d_value, cfg.value_to_trunk, &mut grad);
    }

    terms.entropy = params.entropy();
    let ls_grad = params.log_std_range();
    for (j, g) in d_log_std.into_iter().enumerate() {
        grad[ls_grad.start + j] += g - cfg.entropy_coef;
    }
    terms.total = -terms.surrogate + cfg.value_coef * terms.value_loss - cfg.entropy_coef * terms.entropy;
    terms.clip_fraction = clipped as f64 / n;
    Ok((terms, grad))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_steps: usize,
    /// A non-finite gradient was met; the returned params are the inputs.
    pub non_finite_gradient: bool,
}

/// Owns optimizer state across successive updates of one policy.
#[derive(Debug, Clone)]
pub struct PpoTrainer {
    pub config: TrainConfig,
    adam: Adam,
}

impl PpoTrainer {
    pub fn new(config: TrainConfig, params: &PolicyParams) -> Result<Self, ControlError> {
        config.validate()?;
        let adam = Adam::new(params.n_params());
        Ok(Self { config, adam })
    }

    pub fn update(&mut self, params: &PolicyParams, batch: &[Trajectory], rng: &mut Rng) -> Result<(PolicyParams, UpdateStats), ControlError> {
        let samples = build_samples(batch, self.config.gamma, self.config.lambda);
        if samples.is_empty() {
            return Err(ControlError::EmptyBatch);
        }
        let cfg = &self.config;
        let saved_adam = self.adam.clone();
        let mut next = params.clone();
        let mut stats = UpdateStats::default();
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut mb: Vec<Sample> = Vec::with_capacity(cfg.minibatch_size);
        let mut last = LossTerms::default();
        for _ in 0..cfg.epochs {
            order.shuffle(rng);
            for chunk in order.chunks(cfg.minibatch_size) {
                mb.clear();
                mb.extend(chunk.iter().map(|&i| samples[i].clone()));
                let (terms, mut grad) = loss_and_grad(&next, &mb, cfg)?;
                if !grad.iter().all(|g| g.is_finite()) {
                    log::warn!("non-finite gradient; update abandoned");
                    self.adam = saved_adam;
                    return Ok((
                        params.clone(),
                        UpdateStats {
                            non_finite_gradient: true,
                            ..stats
                        },
                    ));
                }
                if cfg.max_grad_norm > 0.0 {
                    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                    if norm > cfg.max_grad_norm {
                        let k = cfg.max_grad_norm / norm;
                        grad.iter_mut().for_each(|g| *g *= k);
                    }
                }
                self.adam.step(&mut next.params, &grad, cfg.learning_rate);
                stats.grad_steps += 1;
                last = terms;
            }
        }
        stats.surrogate = last.surrogate;
        stats.value_loss = last.value_loss;
        stats.entropy = last.entropy;
        stats.approx_kl = last.approx_kl;
        stats.clip_fraction = last.clip_fraction;
        Ok((next, stats))
    }
}

/// One update with fresh optimizer state.
pub fn ppo_update(params: &PolicyParams, batch: &[Trajectory], config: &TrainConfig, rng: &mut Rng) -> Result<(PolicyParams, UpdateStats), ControlError> {
    PpoTrainer::new(config.clone(), params)?.update(params, batch, rng)
}
