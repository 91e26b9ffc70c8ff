//! Value-based training: ε-greedy acting, replay, bootstrapped MSE updates.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::env::Environment;
use super::log::{EpisodeRecord, RewardLog};
use super::replay::{ReplayBuffer, Transition};
use super::{argmax, check_model_fits, Budget};
use crate::error::Result;
use crate::optim::{Optimizer, OptimizerKind};
use crate::qnet::QModel;
use crate::seeding::{self, stream};

/// Linear decay from `start` to `end` over `decay_steps` environment steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: usize,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_steps: 10_000,
        }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, step: usize) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    pub lr: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub epsilon: EpsilonSchedule,
    /// Hard-copy the online network into the target network every this many
    /// environment steps. 0 bootstraps from the online network itself.
    pub target_sync: usize,
    /// Run one gradient step every this many environment steps.
    pub train_every: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Record real elapsed milliseconds per episode. Off keeps logs
    /// reproducible byte for byte.
    pub wall_clock: bool,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            gamma: 0.99,
            batch_size: 64,
            buffer_capacity: ReplayBuffer::DEFAULT_CAPACITY,
            epsilon: EpsilonSchedule::default(),
            target_sync: 100,
            train_every: 1,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            wall_clock: false,
        }
    }
}

/// `reward` if the episode terminated, else `reward + gamma·max_next_q`.
pub fn dqn_target(reward: f64, gamma: f64, max_next_q: f64, terminated: bool) -> f64 {
    if terminated {
        reward
    } else {
        reward + gamma * max_next_q
    }
}

/// Uniform action with probability `epsilon`, otherwise the first maximizer.
pub fn epsilon_greedy<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> usize {
    assert!(!q.is_empty(), "no actions to choose from");
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.len())
    } else {
        argmax(q)
    }
}

fn feature_key(features: &[f64]) -> Vec<u64> {
    features.iter().map(|f| f.to_bits()).collect()
}

/// One minibatch update of the online network.
///
/// Returns `None` (skip) when the buffer holds fewer than `batch_size`
/// transitions, otherwise the batch MSE before the update. Bootstrap values
/// come from `target`, or from `model` itself when `target` is `None`.
pub fn dqn_train_step<R: Rng + ?Sized>(
    model: &mut QModel,
    target: Option<&QModel>,
    buffer: &ReplayBuffer,
    batch_size: usize,
    gamma: f64,
    optimizer: &mut Optimizer,
    rng: &mut R,
) -> Result<Option<f64>> {
    if batch_size == 0 || buffer.len() < batch_size {
        return Ok(None);
    }
    let batch = buffer.sample(batch_size, rng);
    let bootstrap = target.unwrap_or(model);

    let mut next_max: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut targets = Vec::with_capacity(batch.len());
    for t in &batch {
        let y = if t.terminated {
            t.reward
        } else {
            let key = feature_key(&t.next_state);
            let max_q = match next_max.get(&key) {
                Some(&v) => v,
                None => {
                    let q = bootstrap.q_values(&t.next_state)?;
                    let v = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    next_max.insert(key, v);
                    v
                }
            };
            dqn_target(t.reward, gamma, max_q, false)
        };
        targets.push(y);
    }

    // Identical states share one forward/backward pass; the loss gradient is
    // linear in d_logits so summing per state is exact.
    let mut group_of: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut groups: Vec<(&Transition, Vec<(usize, f64)>)> = Vec::new();
    for (t, &y) in batch.iter().zip(&targets) {
        let idx = *group_of.entry(feature_key(&t.state)).or_insert_with(|| {
            groups.push((t, Vec::new()));
            groups.len() - 1
        });
        groups[idx].1.push((t.action, y));
    }

    let scale = 2.0 / batch.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; model.n_trainable()];
    let mut d_logits = vec![0.0; model.n_actions()];
    for (t, members) in &groups {
        let eval = model.evaluate(&t.state)?;
        d_logits.iter_mut().for_each(|d| *d = 0.0);
        for &(a, y) in members {
            let diff = eval.logits[a] - y;
            loss += diff * diff;
            d_logits[a] += scale * diff;
        }
        model.accumulate(&eval, &d_logits, &mut grad);
    }
    let mut theta = model.trainable();
    optimizer.step(&mut theta, &grad);
    model.set_trainable(&theta);
    Ok(Some(loss / batch.len() as f64))
}

/// Runs ε-greedy episodes with replay and target syncing until `budget` is
/// spent. With a step budget the last episode may be cut short so exactly
/// that many environment steps are taken.
pub fn train_dqn(
    config: &DqnConfig,
    env: &mut dyn Environment,
    model: &mut QModel,
    budget: Budget,
) -> Result<RewardLog> {
    check_model_fits(model, env)?;
    let mut rng = seeding::rng_for(config.seed, stream::AGENT, 0);
    let mut buffer = ReplayBuffer::new(config.buffer_capacity);
    let mut optimizer = Optimizer::new(config.optimizer, config.lr, model.n_trainable());
    let mut target = (config.target_sync > 0).then(|| model.clone());
    let mut log = RewardLog::new();
    let mut total_steps = 0usize;
    let train_every = config.train_every.max(1);

    for episode in 0.. {
        let exhausted = match budget {
            Budget::Episodes(n) => episode >= n,
            Budget::Steps(n) => total_steps >= n,
        };
        if exhausted {
            break;
        }
        let started = Instant::now();
        let mut obs = env.reset(seeding::derive_seed(
            config.seed,
            stream::ENV_RESET,
            episode as u64,
        ))?;
        let mut ep_reward = 0.0;
        let mut ep_steps = 0;
        loop {
            if let Budget::Steps(n) = budget {
                if total_steps >= n {
                    break;
                }
            }
            let eps = config.epsilon.at(total_steps);
            let q = model.q_values(&obs)?;
            let action = epsilon_greedy(&q, eps, &mut rng);
            let step = env.step(action)?;
            total_steps += 1;
            ep_steps += 1;
            ep_reward += step.reward;
            let done = step.done();
            buffer.push(Transition {
                state: std::mem::take(&mut obs),
                action,
                reward: step.reward,
                next_state: step.observation.clone(),
                terminated: step.terminated,
            });
            if total_steps.is_multiple_of(train_every) {
                dqn_train_step(
                    model,
                    target.as_ref(),
                    &buffer,
                    config.batch_size,
                    config.gamma,
                    &mut optimizer,
                    &mut rng,
                )?;
            }
            if let Some(t) = target.as_mut() {
                if total_steps.is_multiple_of(config.target_sync) {
                    t.clone_from(model);
                }
            }
            if done {
                break;
            }
            obs = step.observation;
        }
        log.push(EpisodeRecord {
            episode,
            steps: ep_steps,
            total_reward: ep_reward,
            epsilon: config.epsilon.at(total_steps),
            ms: if config.wall_clock {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        });
    }
    Ok(log)
}
