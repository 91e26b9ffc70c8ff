//! The environment contract and the native environments.

use rand::Rng;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnvError {
    #[error("action {action} out of range for {n_actions} actions")]
    InvalidAction { action: usize, n_actions: usize },
    #[error("episode is over (or never started); reset before stepping")]
    NeedsReset,
}

/// Outcome of one environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl Step {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// Episodic environment with a fixed observation size and discrete actions.
///
/// `step` is only valid between a `reset` and the first step that reports
/// `terminated` or `truncated`.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>>;
    fn step(&mut self, action: usize) -> Result<Step>;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn obs_dim(&self) -> usize {
        (**self).obs_dim()
    }
    fn n_actions(&self) -> usize {
        (**self).n_actions()
    }
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        (**self).reset(seed)
    }
    fn step(&mut self, action: usize) -> Result<Step> {
        (**self).step(action)
    }
}

fn check_action(action: usize, n_actions: usize) -> Result<()> {
    if action >= n_actions {
        return Err(EnvError::InvalidAction { action, n_actions }.into());
    }
    Ok(())
}

impl From<EnvError> for Error {
    fn from(e: EnvError) -> Self {
        Error::Env(e)
    }
}

/// 1-D chain: start in the middle, +1 at the right end, −1 at the left end.
#[derive(Clone, Debug)]
pub struct GridWorld {
    length: usize,
    position: usize,
    steps: usize,
    live: bool,
}

impl GridWorld {
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;
    pub const MAX_STEPS: usize = 50;

    pub fn new(length: usize) -> Result<Self> {
        if length < 3 || length.is_multiple_of(2) {
            return Err(Error::config(format!(
                "gridworld length must be odd and at least 3, got {length}"
            )));
        }
        Ok(Self {
            length,
            position: length / 2,
            steps: 0,
            live: false,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn start(&self) -> usize {
        self.length / 2
    }

    pub fn one_hot(&self, position: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.length];
        v[position] = 1.0;
        v
    }

    pub fn position(&self) -> usize {
        self.position
    }
}

impl Environment for GridWorld {
    fn obs_dim(&self) -> usize {
        self.length
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn reset(&mut self, _seed: u64) -> Result<Vec<f64>> {
        self.position = self.start();
        self.steps = 0;
        self.live = true;
        Ok(self.one_hot(self.position))
    }

    fn step(&mut self, action: usize) -> Result<Step> {
        check_action(action, 2)?;
        if !self.live {
            return Err(EnvError::NeedsReset.into());
        }
        self.position = if action == Self::RIGHT {
            self.position + 1
        } else {
            self.position - 1
        };
        self.steps += 1;
        let (reward, terminated) = if self.position == self.length - 1 {
            (1.0, true)
        } else if self.position == 0 {
            (-1.0, true)
        } else {
            (0.0, false)
        };
        let truncated = !terminated && self.steps >= Self::MAX_STEPS;
        self.live = !(terminated || truncated);
        Ok(Step {
            observation: self.one_hot(self.position),
            reward,
            terminated,
            truncated,
        })
    }
}

/// Classic cart-pole balancing with explicit Euler integration.
/// See `docs/environments.md` for the exact update equations.
#[derive(Clone, Debug)]
pub struct CartPole {
    state: [f64; 4],
    steps: usize,
    live: bool,
}

impl CartPole {
    pub const GRAVITY: f64 = 9.8;
    pub const CART_MASS: f64 = 1.0;
    pub const POLE_MASS: f64 = 0.1;
    pub const HALF_LENGTH: f64 = 0.5;
    pub const FORCE: f64 = 10.0;
    pub const TAU: f64 = 0.02;
    pub const X_LIMIT: f64 = 2.4;
    pub const THETA_LIMIT: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
    pub const MAX_STEPS: usize = 500;

    pub fn new() -> Self {
        Self {
            state: [0.0; 4],
            steps: 0,
            live: false,
        }
    }

    /// An episode starting from an explicit `[x, x_dot, theta, theta_dot]`.
    pub fn with_state(state: [f64; 4]) -> Self {
        Self {
            state,
            steps: 0,
            live: true,
        }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    /// One Euler step of the dynamics under `force`.
    pub fn dynamics(state: [f64; 4], force: f64) -> [f64; 4] {
        let [x, x_dot, theta, theta_dot] = state;
        let total_mass = Self::CART_MASS + Self::POLE_MASS;
        let polemass_length = Self::POLE_MASS * Self::HALF_LENGTH;
        let (sin, cos) = theta.sin_cos();
        let temp = (force + polemass_length * theta_dot * theta_dot * sin) / total_mass;
        let theta_acc = (Self::GRAVITY * sin - cos * temp)
            / (Self::HALF_LENGTH * (4.0 / 3.0 - Self::POLE_MASS * cos * cos / total_mass));
        let x_acc = temp - polemass_length * theta_acc * cos / total_mass;
        [
            x + Self::TAU * x_dot,
            x_dot + Self::TAU * x_acc,
            theta + Self::TAU * theta_dot,
            theta_dot + Self::TAU * theta_acc,
        ]
    }
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for CartPole {
    fn obs_dim(&self) -> usize {
        4
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let mut rng = seeding::rng_for(seed, seeding::stream::ENV_RESET, 0);
        for s in &mut self.state {
            *s = rng.gen_range(-0.05..0.05);
        }
        self.steps = 0;
        self.live = true;
        Ok(self.state.to_vec())
    }

    fn step(&mut self, action: usize) -> Result<Step> {
        check_action(action, 2)?;
        if !self.live {
            return Err(EnvError::NeedsReset.into());
        }
        let force = if action == 1 {
            Self::FORCE
        } else {
            -Self::FORCE
        };
        self.state = Self::dynamics(self.state, force);
        self.steps += 1;
        let [x, _, theta, _] = self.state;
        let terminated = x.abs() > Self::X_LIMIT || theta.abs() > Self::THETA_LIMIT;
        let truncated = !terminated && self.steps >= Self::MAX_STEPS;
        self.live = !(terminated || truncated);
        Ok(Step {
            observation: self.state.to_vec(),
            reward: 1.0,
            terminated,
            truncated,
        })
    }
}

/// Single-state, single-step bandit: every episode is one pull.
#[derive(Clone, Debug)]
pub struct Bandit {
    payouts: Vec<f64>,
    live: bool,
}

impl Bandit {
    pub fn new(payouts: Vec<f64>) -> Result<Self> {
        if payouts.is_empty() {
            return Err(Error::config("bandit needs at least one arm"));
        }
        Ok(Self {
            payouts,
            live: false,
        })
    }
}

impl Environment for Bandit {
    fn obs_dim(&self) -> usize {
        1
    }

    fn n_actions(&self) -> usize {
        self.payouts.len()
    }

    fn reset(&mut self, _seed: u64) -> Result<Vec<f64>> {
        self.live = true;
        Ok(vec![0.0])
    }

    fn step(&mut self, action: usize) -> Result<Step> {
        check_action(action, self.payouts.len())?;
        if !self.live {
            return Err(EnvError::NeedsReset.into());
        }
        self.live = false;
        Ok(Step {
            observation: vec![0.0],
            reward: self.payouts[action],
            terminated: true,
            truncated: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gridworld_start_and_right_walk() {
        let mut env = GridWorld::new(5).unwrap();
        let obs = env.reset(0).unwrap();
        assert_eq!(obs, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let s1 = env.step(GridWorld::RIGHT).unwrap();
        assert_eq!((s1.reward, s1.terminated), (0.0, false));
        let s2 = env.step(GridWorld::RIGHT).unwrap();
        assert_eq!((s2.reward, s2.terminated), (1.0, true));
        assert!(matches!(
            env.step(GridWorld::RIGHT),
            Err(Error::Env(EnvError::NeedsReset))
        ));
    }

    #[test]
    fn gridworld_truncates() {
        let mut env = GridWorld::new(5).unwrap();
        env.reset(0).unwrap();
        let mut last = None;
        for i in 0..GridWorld::MAX_STEPS {
            let a = if i % 2 == 0 {
                GridWorld::RIGHT
            } else {
                GridWorld::LEFT
            };
            last = Some(env.step(a).unwrap());
        }
        let last = last.unwrap();
        assert!(last.truncated && !last.terminated);
    }

    #[test]
    fn gridworld_rejects_bad_length() {
        for len in [1, 2, 4, 6] {
            assert!(matches!(GridWorld::new(len), Err(Error::Config(_))));
        }
    }

    #[test]
    fn step_before_reset_and_invalid_action() {
        let mut env = CartPole::new();
        assert!(matches!(env.step(0), Err(Error::Env(EnvError::NeedsReset))));
        env.reset(3).unwrap();
        assert!(matches!(
            env.step(2),
            Err(Error::Env(EnvError::InvalidAction {
                action: 2,
                n_actions: 2
            }))
        ));
    }

    #[test]
    fn cartpole_first_step_from_rest() {
        let mut env = CartPole::with_state([0.0; 4]);
        let step = env.step(1).unwrap();
        assert!(!step.terminated && !step.truncated);
        assert_eq!(step.reward, 1.0);
        // Hand evaluation of the Euler update with force +10 from rest:
        // temp = 10/1.1, theta_acc = -temp / (0.5 * (4/3 - 0.1/1.1)),
        // x_acc = temp - 0.05 * theta_acc / 1.1.
        let golden = [0.0, 0.195_121_951_219_512_2, 0.0, -0.292_682_926_829_268_3];
        for (got, want) in step.observation.iter().zip(golden) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn cartpole_reset_is_seeded() {
        let mut a = CartPole::new();
        let mut b = CartPole::new();
        assert_eq!(a.reset(11).unwrap(), b.reset(11).unwrap());
        assert_ne!(a.reset(11).unwrap(), a.reset(12).unwrap());
        assert!(a.reset(5).unwrap().iter().all(|v| v.abs() <= 0.05));
    }

    #[test]
    fn bandit_is_one_step() {
        let mut env = Bandit::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(env.reset(0).unwrap(), vec![0.0]);
        let s = env.step(0).unwrap();
        assert_eq!((s.reward, s.terminated), (1.0, true));
        assert!(env.step(0).is_err());
    }
}
