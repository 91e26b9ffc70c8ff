use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::argmax;
use super::env::Environment;
use crate::error::{Error, Result};
use crate::qnet::{softmax, QModel};
use crate::seeding::{self, stream};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub mean: f64,
    pub returns: Vec<f64>,
}

impl EvalResult {
    fn from_returns(returns: Vec<f64>) -> Self {
        let mean = returns.iter().sum::<f64>() / returns.len() as f64;
        Self { mean, returns }
    }
}

fn run_episodes(
    env: &mut dyn Environment,
    episodes: usize,
    seed: u64,
    mut policy: impl FnMut(&[f64], &mut seeding::Rng) -> Result<usize>,
) -> Result<EvalResult> {
    if episodes == 0 {
        return Err(Error::config("evaluation needs at least one episode"));
    }
    let mut rng = seeding::rng_for(seed, stream::EVAL, 0);
    let mut returns = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        let reset_seed = seeding::derive_seed(seed, stream::EVAL, 1 + ep as u64);
        let mut obs = env.reset(reset_seed)?;
        let mut total = 0.0;
        loop {
            let action = policy(&obs, &mut rng)?;
            let step = env.step(action)?;
            total += step.reward;
            if step.done() {
                break;
            }
            obs = step.observation;
        }
        returns.push(total);
    }
    Ok(EvalResult::from_returns(returns))
}

/// Runs `episodes` episodes without learning. `greedy` takes the argmax of
/// the head outputs; otherwise actions are sampled from their softmax.
pub fn evaluate(
    model: &QModel,
    env: &mut dyn Environment,
    episodes: usize,
    greedy: bool,
    seed: u64,
) -> Result<EvalResult> {
    super::check_model_fits(model, env)?;
    run_episodes(env, episodes, seed, |obs, rng| {
        let logits = model.evaluate(obs)?.logits;
        if greedy {
            Ok(argmax(&logits))
        } else {
            let probs = softmax(&logits);
            let dist = WeightedIndex::new(&probs)
                .map_err(|e| Error::contract(format!("policy is not a distribution: {e}")))?;
            Ok(dist.sample(rng))
        }
    })
}

/// Uniform-random policy baseline.
pub fn evaluate_random(
    env: &mut dyn Environment,
    episodes: usize,
    seed: u64,
) -> Result<EvalResult> {
    let n = env.n_actions();
    run_episodes(env, episodes, seed, |_, rng| Ok(rng.gen_range(0..n)))
}
