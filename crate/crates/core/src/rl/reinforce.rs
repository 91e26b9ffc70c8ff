//! Monte-Carlo policy gradient over the softmax head.

use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::check_model_fits;
use super::env::Environment;
use super::log::{EpisodeRecord, RewardLog};
use crate::error::{Error, Result};
use crate::optim::{clip_global_norm, Optimizer, OptimizerKind};
use crate::qnet::{log_softmax, softmax, HeadMode, QModel};
use crate::seeding::{self, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReinforceConfig {
    pub lr: f64,
    pub gamma: f64,
    pub normalize_returns: bool,
    /// Global L2 norm cap on each update's gradient; `None` disables.
    pub grad_clip: Option<f64>,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub wall_clock: bool,
}

impl Default for ReinforceConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            gamma: 0.99,
            normalize_returns: false,
            grad_clip: Some(10.0),
            optimizer: OptimizerKind::Adam,
            seed: 0,
            wall_clock: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    /// `log π(action|state)` at sampling time, if recorded.
    pub log_prob: Option<f64>,
}

pub type Trajectory = Vec<TrajectoryStep>;

/// Discounted reward-to-go `G_t = r_t + gamma·G_{t+1}`.
///
/// With `normalize`, returns are shifted to mean 0 and scaled to standard
/// deviation 1 (only shifted when they are all equal).
pub fn reinforce_returns(rewards: &[f64], gamma: f64, normalize: bool) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut running = 0.0;
    for (t, &r) in rewards.iter().enumerate().rev() {
        running = r + gamma * running;
        out[t] = running;
    }
    if normalize && !out.is_empty() {
        let n = out.len() as f64;
        let mean = out.iter().sum::<f64>() / n;
        let std = (out.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n).sqrt();
        for g in &mut out {
            *g -= mean;
            if std > 1e-12 {
                *g /= std;
            }
        }
    }
    out
}

/// One policy-gradient step on `loss = −Σ_t log π(a_t|s_t)·G_t`.
/// Returns the loss before the step.
pub fn reinforce_update(
    model: &mut QModel,
    trajectory: &[TrajectoryStep],
    config: &ReinforceConfig,
    optimizer: &mut Optimizer,
) -> Result<f64> {
    if trajectory.is_empty() {
        return Err(Error::contract(
            "reinforce update needs a non-empty trajectory",
        ));
    }
    model.head.expect_mode(HeadMode::PolicyProbs)?;
    let rewards: Vec<f64> = trajectory.iter().map(|s| s.reward).collect();
    let returns = reinforce_returns(&rewards, config.gamma, config.normalize_returns);

    let mut loss = 0.0;
    let mut grad = vec![0.0; model.n_trainable()];
    let mut d_logits = vec![0.0; model.n_actions()];
    for (step, &g) in trajectory.iter().zip(&returns) {
        if g == 0.0 {
            continue;
        }
        let eval = model.evaluate(&step.state)?;
        let logp = log_softmax(&eval.logits);
        loss -= logp[step.action] * g;
        for (j, d) in d_logits.iter_mut().enumerate() {
            let indicator = if j == step.action { 1.0 } else { 0.0 };
            *d = -g * (indicator - logp[j].exp());
        }
        model.accumulate(&eval, &d_logits, &mut grad);
    }
    if let Some(max) = config.grad_clip {
        clip_global_norm(&mut grad, max);
    }
    let mut theta = model.trainable();
    optimizer.step(&mut theta, &grad);
    model.set_trainable(&theta);
    Ok(loss)
}

/// Samples one episode from the current policy.
pub fn sample_episode(
    model: &QModel,
    env: &mut dyn Environment,
    reset_seed: u64,
    rng: &mut seeding::Rng,
) -> Result<Trajectory> {
    let mut obs = env.reset(reset_seed)?;
    let mut trajectory = Vec::new();
    loop {
        let probs = model.policy_probs(&obs)?;
        let dist = WeightedIndex::new(&probs)
            .map_err(|e| Error::contract(format!("policy is not a distribution: {e}")))?;
        let action = dist.sample(rng);
        let step = env.step(action)?;
        trajectory.push(TrajectoryStep {
            state: std::mem::take(&mut obs),
            action,
            reward: step.reward,
            log_prob: Some(probs[action].ln()),
        });
        if step.done() {
            return Ok(trajectory);
        }
        obs = step.observation;
    }
}

/// One update per sampled episode, for `episodes` episodes.
pub fn train_reinforce(
    config: &ReinforceConfig,
    env: &mut dyn Environment,
    model: &mut QModel,
    episodes: usize,
) -> Result<RewardLog> {
    check_model_fits(model, env)?;
    model.head.expect_mode(HeadMode::PolicyProbs)?;
    let mut rng = seeding::rng_for(config.seed, stream::AGENT, 0);
    let mut optimizer = Optimizer::new(config.optimizer, config.lr, model.n_trainable());
    let mut log = RewardLog::new();
    for episode in 0..episodes {
        let started = Instant::now();
        let seed = seeding::derive_seed(config.seed, stream::ENV_RESET, episode as u64);
        let trajectory = sample_episode(model, env, seed, &mut rng)?;
        reinforce_update(model, &trajectory, config, &mut optimizer)?;
        log.push(EpisodeRecord {
            episode,
            steps: trajectory.len(),
            total_reward: trajectory.iter().map(|s| s.reward).sum(),
            epsilon: 0.0,
            ms: if config.wall_clock {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        });
    }
    Ok(log)
}

/// Probability of `action` in `state` under the model's softmax head.
pub fn action_probability(model: &QModel, state: &[f64], action: usize) -> Result<f64> {
    Ok(softmax(&model.evaluate(state)?.logits)[action])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn returns_examples() {
        let g = reinforce_returns(&[1.0, 1.0, 1.0], 0.99, false);
        let want = [2.9701, 1.99, 1.0];
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            reinforce_returns(&[3.0, -1.0, 2.0], 0.0, false),
            vec![3.0, -1.0, 2.0]
        );
        assert_eq!(reinforce_returns(&[5.0], 0.7, false), vec![5.0]);
    }

    #[test]
    fn recurrence_holds_exactly() {
        let rewards = [0.5, -2.0, 3.25, 0.0, 1.0];
        let gamma = 0.9;
        let g = reinforce_returns(&rewards, gamma, false);
        for t in 0..rewards.len() - 1 {
            assert_eq!(g[t], rewards[t] + gamma * g[t + 1]);
        }
    }

    #[test]
    fn normalized_returns() {
        let g = reinforce_returns(&[1.0, 0.0, 2.0, 5.0], 0.99, true);
        let mean = g.iter().sum::<f64>() / 4.0;
        let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        assert_eq!(reinforce_returns(&[4.0], 0.99, true), vec![0.0]);
    }
}
