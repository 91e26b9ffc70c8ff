use std::path::{Path, PathBuf};

use qrlnas_core::envbridge::BridgeEnv;
use qrlnas_core::experiment::{build_model, fixed_baseline_architecture};
use qrlnas_core::nas::evolutionary_search;
use qrlnas_core::qnet::{EncoderLayout, HeadMode, QModel};
use qrlnas_core::rl::{
    train_dqn, train_reinforce, Budget, CartPole, Environment, GridWorld, RewardLog,
};
use qrlnas_core::seeding::{self, stream};
use qrlnas_core::Result;

use crate::checkpoint::Checkpoint;
use crate::config::{Algo, EnvSpec, RunConfig};
use crate::plot::{render_svg, DEFAULT_WINDOW};

pub const DEFAULT_OUTPUT_DIR: &str = "qrlnas-out";
pub const SUMMARY_WINDOW: usize = 50;

pub fn make_env(config: &RunConfig) -> Result<Box<dyn Environment>> {
    Ok(match config.env_spec()? {
        EnvSpec::GridWorld => Box::new(GridWorld::new(config.gridworld_length)?),
        EnvSpec::CartPole => Box::new(CartPole::new()),
        EnvSpec::Bridge(cmd) => Box::new(BridgeEnv::spawn(&cmd, config.bridge_timeout_ms)?),
    })
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub episodes: usize,
    pub mean_last: f64,
    pub best_fitness: Option<f64>,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "mean reward over last {} of {} episodes: {:.6}",
            SUMMARY_WINDOW.min(self.episodes),
            self.episodes,
            self.mean_last
        )?;
        if let Some(best) = self.best_fitness {
            write!(f, " (search best fitness {best:.6})")?;
        }
        write!(f, "; outputs in {}", self.output_dir.display())
    }
}

/// Resolves and validates the config, trains the selected arm and writes
/// every artifact into the output directory.
pub fn run(mut config: RunConfig, workers: usize) -> Result<RunSummary> {
    config.resolve_architecture()?;
    config.validate()?;
    let out = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    std::fs::create_dir_all(&out)?;

    let mut env = make_env(&config)?;
    let mut rng = seeding::rng_for(config.seed, stream::INIT, 0);
    let mut best_fitness = None;

    let (model, log) = match config.algo {
        Algo::QrlDqn | Algo::QrlReinforce => {
            let arch = match &config.architecture {
                Some(a) => a.clone(),
                None => fixed_baseline_architecture(config.n_qubits)?,
            };
            let mode = if config.algo == Algo::QrlDqn {
                HeadMode::QValues
            } else {
                HeadMode::PolicyProbs
            };
            let mut model = build_model(
                arch,
                env.obs_dim(),
                env.n_actions(),
                mode,
                config.squash,
                config.train_head,
                &mut rng,
            )?;
            let log = if config.algo == Algo::QrlDqn {
                train_dqn(
                    &config.dqn_config(),
                    env.as_mut(),
                    &mut model,
                    Budget::Episodes(config.episodes),
                )?
            } else {
                train_reinforce(
                    &config.reinforce_config(),
                    env.as_mut(),
                    &mut model,
                    config.episodes,
                )?
            };
            (model, log)
        }
        Algo::QrlNas => {
            let space = config.search_space()?;
            let search = config.search_config(workers);
            let env_config = config.clone();
            let make = move || make_env(&env_config);
            let outcome = evolutionary_search(&space, &make, &search)?;
            std::fs::write(out.join("search_log.csv"), outcome.log.to_csv())?;
            let mut arch_json = serde_json::to_string_pretty(&outcome.best.arch)?;
            arch_json.push('\n');
            std::fs::write(out.join("best_architecture.json"), arch_json)?;
            best_fitness = outcome.best.fitness;

            // The winner keeps training, from its searched weights, for the run's episodes.
            let best = outcome.best;
            let mut model = QModel::new(
                best.arch.clone(),
                best.params,
                best.head,
                EncoderLayout::chunked(env.obs_dim(), best.arch.n_qubits(), config.squash),
                config.train_head,
            )?;
            let log = train_dqn(
                &config.dqn_config(),
                env.as_mut(),
                &mut model,
                Budget::Episodes(config.episodes),
            )?;
            (model, log)
        }
    };

    write_outputs(&out, &config, &model, &log)?;
    Ok(RunSummary {
        episodes: log.len(),
        mean_last: log.mean_last(SUMMARY_WINDOW).unwrap_or(0.0),
        best_fitness,
        output_dir: out,
    })
}

fn write_outputs(out: &Path, config: &RunConfig, model: &QModel, log: &RewardLog) -> Result<()> {
    log.write_csv(&out.join("rewards.csv"))?;
    std::fs::write(
        out.join("rewards.svg"),
        render_svg(&[("rewards".to_string(), log.clone())], DEFAULT_WINDOW)?,
    )?;
    Checkpoint::from_model(model, config).save(&out.join("checkpoint.json"))?;
    let mut echo = serde_json::to_string_pretty(config)?;
    echo.push('\n');
    std::fs::write(out.join("config_echo.json"), echo)?;
    Ok(())
}
