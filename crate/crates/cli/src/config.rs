//! Run configuration: a TOML (or echoed JSON) file, then `QRLNAS_SEED`, then
//! command-line flags, each overriding the previous.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qrlnas_core::nas::{SearchConfig, SearchSpace, WirePolicy};
use qrlnas_core::optim::OptimizerKind;
use qrlnas_core::qnet::{Architecture, Squash};
use qrlnas_core::qsim::GateKind;
use qrlnas_core::rl::{DqnConfig, EpsilonSchedule, ReinforceConfig};
use qrlnas_core::{Error, Result};

pub const SEED_ENV_VAR: &str = "QRLNAS_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "qrl-nas")]
    QrlNas,
    #[serde(rename = "qrl-dqn")]
    QrlDqn,
    #[serde(rename = "qrl-reinforce")]
    QrlReinforce,
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algo::QrlNas => "qrl-nas",
            Algo::QrlDqn => "qrl-dqn",
            Algo::QrlReinforce => "qrl-reinforce",
        })
    }
}

impl std::str::FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qrl-nas" => Ok(Algo::QrlNas),
            "qrl-dqn" => Ok(Algo::QrlDqn),
            "qrl-reinforce" => Ok(Algo::QrlReinforce),
            other => Err(Error::Config(format!(
                "unknown algo {other:?}; expected qrl-nas, qrl-dqn or qrl-reinforce"
            ))),
        }
    }
}

/// Parsed form of the `env` field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnvSpec {
    GridWorld,
    CartPole,
    /// Whitespace-separated command line of an external bridge process.
    Bridge(Vec<String>),
}

impl EnvSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gridworld" => Ok(EnvSpec::GridWorld),
            "cartpole" => Ok(EnvSpec::CartPole),
            _ => match s.strip_prefix("bridge:") {
                Some(cmd) if !cmd.trim().is_empty() => Ok(EnvSpec::Bridge(
                    cmd.split_whitespace().map(str::to_owned).collect(),
                )),
                _ => Err(Error::Config(format!(
                    "unknown env {s:?}; expected gridworld, cartpole or bridge:<command>"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub population: usize,
    pub generations: usize,
    pub train_budget: usize,
    pub eval_episodes: usize,
    pub tournament_size: usize,
    pub elitism: usize,
    pub mutation_rate: Option<f64>,
    pub inherit_params: bool,
    pub genome_length: usize,
    pub wire_policy: WirePolicy,
    /// Gate names; empty means the full alphabet.
    pub allowed_kinds: Vec<String>,
}

impl Default for SearchSection {
    fn default() -> Self {
        let c = SearchConfig::default();
        Self {
            population: c.population,
            generations: c.generations,
            train_budget: c.train_budget,
            eval_episodes: c.eval_episodes,
            tournament_size: c.tournament_size,
            elitism: c.elitism,
            mutation_rate: c.mutation_rate,
            inherit_params: c.inherit_params,
            genome_length: SearchSpace::DEFAULT_GENOME_LENGTH,
            wire_policy: WirePolicy::default(),
            allowed_kinds: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub algo: Algo,
    pub env: String,
    pub gridworld_length: usize,
    pub bridge_timeout_ms: u64,
    pub n_qubits: usize,
    /// Genome file (architecture JSON). Resolved inline into `architecture`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub architecture_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub architecture: Option<Architecture>,
    pub lr: f64,
    pub gamma: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub episodes: usize,
    pub seed: u64,
    pub epsilon: EpsilonSchedule,
    pub target_sync: usize,
    pub train_every: usize,
    pub optimizer: OptimizerKind,
    pub squash: Squash,
    pub train_head: bool,
    pub normalize_returns: bool,
    pub grad_clip: Option<f64>,
    pub wall_clock: bool,
    pub search: SearchSection,
    /// Not echoed, so a run's provenance does not depend on where it was written.
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let dqn = DqnConfig::default();
        let reinforce = ReinforceConfig::default();
        Self {
            algo: Algo::QrlDqn,
            env: "gridworld".into(),
            gridworld_length: 5,
            bridge_timeout_ms: 30_000,
            n_qubits: 4,
            architecture_file: None,
            architecture: None,
            lr: dqn.lr,
            gamma: dqn.gamma,
            buffer_capacity: dqn.buffer_capacity,
            batch_size: dqn.batch_size,
            episodes: 200,
            seed: 0,
            epsilon: dqn.epsilon,
            target_sync: dqn.target_sync,
            train_every: dqn.train_every,
            optimizer: dqn.optimizer,
            squash: Squash::default(),
            train_head: true,
            normalize_returns: reinforce.normalize_returns,
            grad_clip: reinforce.grad_clip,
            wall_clock: false,
            search: SearchSection::default(),
            output_dir: None,
        }
    }
}

/// Command-line values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub algo: Option<String>,
    pub env: Option<String>,
    pub n_qubits: Option<usize>,
    pub architecture_file: Option<PathBuf>,
    pub lr: Option<f64>,
    pub gamma: Option<f64>,
    pub batch_size: Option<usize>,
    pub buffer_capacity: Option<usize>,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parses TOML, or JSON when the path ends in `.json`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        // Relative genome paths are relative to the config file.
        if let (Some(file), Some(dir)) = (config.architecture_file.as_mut(), path.parent()) {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies `seed_env` (the `QRLNAS_SEED` value, if set) then the flags.
    pub fn apply(&mut self, seed_env: Option<&str>, flags: &Overrides) -> Result<()> {
        if let Some(raw) = seed_env {
            self.seed = raw.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{SEED_ENV_VAR}={raw:?} is not a non-negative integer"
                ))
            })?;
        }
        if let Some(a) = &flags.algo {
            self.algo = a.parse()?;
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &flags.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        take!(
            env,
            n_qubits,
            lr,
            gamma,
            batch_size,
            buffer_capacity,
            episodes,
            seed
        );
        if let Some(f) = &flags.architecture_file {
            self.architecture_file = Some(f.clone());
            self.architecture = None;
        }
        if let Some(d) = &flags.output_dir {
            self.output_dir = Some(d.clone());
        }
        Ok(())
    }

    /// Loads a referenced genome file into `architecture`.
    pub fn resolve_architecture(&mut self) -> Result<()> {
        if let Some(path) = self.architecture_file.take() {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Error::Config(format!("cannot read architecture {}: {e}", path.display()))
            })?;
            let arch: Architecture = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            self.architecture = Some(arch);
        }
        Ok(())
    }

    pub fn env_spec(&self) -> Result<EnvSpec> {
        EnvSpec::parse(&self.env)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.env_spec()?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        for (name, value) in [
            ("buffer_capacity", self.buffer_capacity),
            ("batch_size", self.batch_size),
            ("episodes", self.episodes),
            ("n_qubits", self.n_qubits),
            ("train_every", self.train_every),
            ("gridworld_length", self.gridworld_length),
        ] {
            if value == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.batch_size > self.buffer_capacity {
            return bad("batch_size cannot exceed buffer_capacity".into());
        }
        if self.bridge_timeout_ms == 0 {
            return bad("bridge_timeout_ms must be positive".into());
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.end) {
            return bad("epsilon start and end must lie in [0, 1]".into());
        }
        if let Some(arch) = &self.architecture {
            if arch.n_qubits() != self.n_qubits {
                return bad(format!(
                    "architecture has {} qubits but n_qubits is {}",
                    arch.n_qubits(),
                    self.n_qubits
                ));
            }
        }
        if self.algo == Algo::QrlNas {
            if self.architecture.is_some() || self.architecture_file.is_some() {
                return bad("qrl-nas searches its own architecture; drop the genome file".into());
            }
            let s = &self.search;
            if s.train_budget == 0 {
                return bad("search.train_budget must be positive".into());
            }
            self.search_space()?.validate()?;
            self.search_config(1).validate()?;
        }
        Ok(())
    }

    pub fn dqn_config(&self) -> DqnConfig {
        DqnConfig {
            lr: self.lr,
            gamma: self.gamma,
            batch_size: self.batch_size,
            buffer_capacity: self.buffer_capacity,
            epsilon: self.epsilon,
            target_sync: self.target_sync,
            train_every: self.train_every,
            optimizer: self.optimizer,
            seed: self.seed,
            wall_clock: self.wall_clock,
        }
    }

    pub fn reinforce_config(&self) -> ReinforceConfig {
        ReinforceConfig {
            lr: self.lr,
            gamma: self.gamma,
            normalize_returns: self.normalize_returns,
            grad_clip: self.grad_clip,
            optimizer: self.optimizer,
            seed: self.seed,
            wall_clock: self.wall_clock,
        }
    }

    pub fn search_space(&self) -> Result<SearchSpace> {
        let s = &self.search;
        let allowed_kinds = if s.allowed_kinds.is_empty() {
            GateKind::ALL.to_vec()
        } else {
            s.allowed_kinds
                .iter()
                .map(|name| {
                    GateKind::parse(name)
                        .ok_or_else(|| Error::Config(format!("unknown gate kind {name:?}")))
                })
                .collect::<Result<_>>()?
        };
        Ok(SearchSpace {
            n_qubits: self.n_qubits,
            genome_length: s.genome_length,
            allowed_kinds,
            wire_policy: s.wire_policy,
        })
    }

    pub fn search_config(&self, workers: usize) -> SearchConfig {
        let s = &self.search;
        SearchConfig {
            population: s.population,
            generations: s.generations,
            train_budget: s.train_budget,
            eval_episodes: s.eval_episodes,
            tournament_size: s.tournament_size,
            elitism: s.elitism,
            mutation_rate: s.mutation_rate,
            inherit_params: s.inherit_params,
            seed: self.seed,
            workers,
            squash: self.squash,
            dqn: self.dqn_config(),
        }
    }
}
