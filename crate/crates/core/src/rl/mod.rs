//! Environments, replay, and the two trainers (DQN and REINFORCE).

pub mod conformance;
pub mod dqn;
pub mod env;
pub mod eval;
pub mod log;
pub mod reinforce;
pub mod replay;

pub use dqn::{dqn_target, dqn_train_step, epsilon_greedy, train_dqn, DqnConfig, EpsilonSchedule};
pub use env::{Bandit, CartPole, EnvError, Environment, GridWorld, Step};
pub use eval::{evaluate, evaluate_random, EvalResult};
pub use log::{EpisodeRecord, RewardLog};
pub use reinforce::{
    action_probability, reinforce_returns, reinforce_update, sample_episode, train_reinforce,
    ReinforceConfig, Trajectory, TrajectoryStep,
};
pub use replay::{ReplayBuffer, Transition};

use crate::error::{Error, Result};
use crate::qnet::QModel;

/// How long a training run lasts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Episodes(usize),
    /// Exactly this many environment steps; the last episode may be cut.
    Steps(usize),
}

/// Index of the first maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_model_fits(model: &QModel, env: &dyn Environment) -> Result<()> {
    if model.layout.n_features() != env.obs_dim() {
        return Err(Error::config(format!(
            "model encodes {} features but the environment observes {}",
            model.layout.n_features(),
            env.obs_dim()
        )));
    }
    if model.n_actions() != env.n_actions() {
        return Err(Error::config(format!(
            "model has {} actions but the environment has {}",
            model.n_actions(),
            env.n_actions()
        )));
    }
    Ok(())
}
