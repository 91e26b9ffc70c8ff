use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::{mutate, random_architecture, same_gene, SearchSpace};
use crate::error::{Error, Result};
use crate::qnet::{
    init_params, Architecture, EncoderLayout, HeadMode, OutputHead, ParamStore, QModel, Squash,
};
use crate::rl::{evaluate, train_dqn, Budget, DqnConfig, Environment};
use crate::seeding::{self, stream};

/// Builds a fresh environment instance; each concurrent evaluation owns one.
pub type EnvFactory<'a> = &'a (dyn Fn() -> Result<Box<dyn Environment>> + Sync);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub population: usize,
    pub generations: usize,
    /// Environment steps of DQN training per fitness evaluation.
    pub train_budget: usize,
    pub eval_episodes: usize,
    pub tournament_size: usize,
    pub elitism: usize,
    /// Per-position resample probability; `None` means `1 / genome_length`.
    pub mutation_rate: Option<f64>,
    pub inherit_params: bool,
    pub seed: u64,
    pub workers: usize,
    pub squash: Squash,
    /// Trainer settings; its seed is replaced per candidate.
    pub dqn: DqnConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            population: 8,
            generations: 10,
            train_budget: 5_000,
            eval_episodes: 10,
            tournament_size: 2,
            elitism: 1,
            mutation_rate: None,
            inherit_params: true,
            seed: 0,
            workers: 1,
            squash: Squash::Arctan,
            dqn: DqnConfig::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::config("population must be at least 2"));
        }
        if self.generations == 0 || self.eval_episodes == 0 || self.tournament_size == 0 {
            return Err(Error::config(
                "generations, eval_episodes and tournament_size must be positive",
            ));
        }
        if self.elitism >= self.population {
            return Err(Error::config("elitism must leave room for offspring"));
        }
        if let Some(rate) = self.mutation_rate {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config(format!(
                    "mutation rate {rate} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn mutation_rate_for(&self, space: &SearchSpace) -> f64 {
        self.mutation_rate
            .unwrap_or(1.0 / space.genome_length as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub parent: Option<usize>,
    pub mutation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Unique within a search; also selects the candidate's RNG streams.
    pub id: usize,
    pub arch: Architecture,
    pub params: ParamStore,
    pub head: OutputHead,
    pub fitness: Option<f64>,
    pub lineage: Lineage,
}

impl Candidate {
    /// Untrained candidate with random angles and a unit Q-value head.
    pub fn fresh<R: Rng + ?Sized>(
        id: usize,
        arch: Architecture,
        n_actions: usize,
        rng: &mut R,
    ) -> Self {
        let params = init_params(&arch, rng);
        let head = OutputHead::for_actions(HeadMode::QValues, n_actions, arch.n_qubits());
        Self {
            id,
            arch,
            params,
            head,
            fitness: None,
            lineage: Lineage {
                parent: None,
                mutation: "random".into(),
            },
        }
    }

    pub fn model(&self, obs_dim: usize, squash: Squash) -> Result<QModel> {
        QModel::new(
            self.arch.clone(),
            self.params.clone(),
            self.head.clone(),
            EncoderLayout::chunked(obs_dim, self.arch.n_qubits(), squash),
            true,
        )
    }
}

/// Copies the parent's parameter block wherever the gene is unchanged and
/// draws fresh angles elsewhere.
pub fn inherit_params<R: Rng + ?Sized>(
    parent: &Candidate,
    child: &Architecture,
    rng: &mut R,
) -> Result<ParamStore> {
    if parent.arch.len() != child.len() {
        return Err(Error::contract(format!(
            "genome lengths differ: parent {} vs child {}",
            parent.arch.len(),
            child.len()
        )));
    }
    let mut values = Vec::with_capacity(child.total_params());
    for (p, c) in parent.arch.placements().iter().zip(child.placements()) {
        let n = c.kind.param_count();
        if same_gene(p, c) {
            values.extend_from_slice(&parent.params[p.param_offset..p.param_offset + n]);
        } else {
            values.extend((0..n).map(|_| rng.gen_range(-PI..=PI)));
        }
    }
    Ok(ParamStore::new(values))
}

/// Trains the candidate in place for exactly `train_budget` steps, then
/// returns its mean greedy return. Also returns the steps consumed.
pub fn fitness(
    candidate: &mut Candidate,
    env: &mut dyn Environment,
    config: &SearchConfig,
) -> Result<(f64, usize)> {
    let mut model = candidate.model(env.obs_dim(), config.squash)?;
    let id = candidate.id as u64;
    let dqn = DqnConfig {
        seed: seeding::derive_seed(config.seed, stream::CANDIDATE, id),
        ..config.dqn.clone()
    };
    let log = train_dqn(&dqn, env, &mut model, Budget::Steps(config.train_budget))?;
    let eval_seed = seeding::derive_seed(config.seed, stream::EVAL, id);
    let score = evaluate(&model, env, config.eval_episodes, true, eval_seed)?.mean;
    candidate.params = model.params;
    candidate.head = model.head;
    candidate.fitness = Some(score);
    Ok((score, log.total_steps()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub generation: usize,
    /// Slot within the generation.
    pub candidate: usize,
    pub id: usize,
    pub fitness: f64,
    pub arch: Architecture,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_ever: f64,
    pub fitnesses: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchLog {
    pub records: Vec<SearchRecord>,
    pub generations: Vec<GenerationSummary>,
    pub total_steps: usize,
}

pub const SEARCH_CSV_HEADER: &str = "generation,candidate,fitness,genome_json";

impl SearchLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SEARCH_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let genome = serde_json::to_string(r.arch.placements()).expect("placements serialize");
            out.push_str(&format!(
                "{},{},{:.6},\"{}\"\n",
                r.generation,
                r.candidate,
                r.fitness,
                genome.replace('"', "\"\"")
            ));
        }
        out
    }

    fn push_generation(&mut self, generation: usize, population: &[Candidate], best_ever: f64) {
        let fitnesses: Vec<f64> = population
            .iter()
            .map(|c| c.fitness.unwrap_or(f64::NAN))
            .collect();
        for (slot, c) in population.iter().enumerate() {
            self.records.push(SearchRecord {
                generation,
                candidate: slot,
                id: c.id,
                fitness: fitnesses[slot],
                arch: c.arch.clone(),
            });
        }
        self.generations.push(GenerationSummary {
            generation,
            best: fitnesses.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean: fitnesses.iter().sum::<f64>() / fitnesses.len() as f64,
            best_ever,
            fitnesses,
        });
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    /// Best-ever candidate, with the parameters it had when scored.
    pub best: Candidate,
    pub log: SearchLog,
}

struct Searcher<'a> {
    space: &'a SearchSpace,
    config: &'a SearchConfig,
    make_env: EnvFactory<'a>,
    n_actions: usize,
    pool: rayon::ThreadPool,
    log: SearchLog,
    best: Option<Candidate>,
}

impl<'a> Searcher<'a> {
    fn new(
        space: &'a SearchSpace,
        config: &'a SearchConfig,
        make_env: EnvFactory<'a>,
    ) -> Result<Self> {
        space.validate()?;
        config.validate()?;
        let n_actions = make_env()?.n_actions();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers.max(1))
            .build()
            .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            space,
            config,
            make_env,
            n_actions,
            pool,
            log: SearchLog::default(),
            best: None,
        })
    }

    fn fresh(&self, id: usize, rng: &mut seeding::Rng) -> Result<Candidate> {
        let arch = random_architecture(self.space, rng)?;
        Ok(Candidate::fresh(id, arch, self.n_actions, rng))
    }

    /// Scores every candidate (in parallel when workers > 1) and logs the generation.
    fn score(&mut self, generation: usize, population: &mut [Candidate]) -> Result<()> {
        let config = self.config;
        let make_env = self.make_env;
        let steps: Vec<usize> = self.pool.install(|| {
            population
                .par_iter_mut()
                .map(|c| {
                    let mut env = make_env()?;
                    fitness(c, env.as_mut(), config).map(|(_, s)| s)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        self.log.total_steps += steps.iter().sum::<usize>();
        for c in population.iter() {
            let f = c.fitness.expect("scored");
            if self
                .best
                .as_ref()
                .is_none_or(|b| f > b.fitness.expect("scored"))
            {
                self.best = Some(c.clone());
            }
        }
        let best_ever = self
            .best
            .as_ref()
            .and_then(|b| b.fitness)
            .expect("non-empty population");
        self.log.push_generation(generation, population, best_ever);
        Ok(())
    }

    fn finish(self) -> Result<SearchOutcome> {
        let expected = self.config.population * self.config.generations * self.config.train_budget;
        if self.log.total_steps != expected {
            return Err(Error::contract(format!(
                "search consumed {} environment steps, budget was {expected}",
                self.log.total_steps
            )));
        }
        Ok(SearchOutcome {
            best: self.best.expect("at least one generation"),
            log: self.log,
        })
    }
}

fn tournament<'p>(
    population: &'p [Candidate],
    size: usize,
    rng: &mut seeding::Rng,
) -> &'p Candidate {
    let mut winner = &population[rng.gen_range(0..population.len())];
    for _ in 1..size {
        let c = &population[rng.gen_range(0..population.len())];
        if c.fitness > winner.fitness {
            winner = c;
        }
    }
    winner
}

/// Generation 0 is random; later generations keep the elite (trained further)
/// and fill the rest by tournament, mutation and optional inheritance.
pub fn evolutionary_search(
    space: &SearchSpace,
    make_env: EnvFactory<'_>,
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    let mut searcher = Searcher::new(space, config, make_env)?;
    let mut rng = seeding::rng_for(config.seed, stream::SEARCH, 0);
    let rate = config.mutation_rate_for(space);
    let mut next_id = 0;
    let mut population = Vec::with_capacity(config.population);
    for _ in 0..config.population {
        population.push(searcher.fresh(next_id, &mut rng)?);
        next_id += 1;
    }
    searcher.score(0, &mut population)?;

    for generation in 1..config.generations {
        let mut ranked: Vec<&Candidate> = population.iter().collect();
        ranked.sort_by(|a, b| b.fitness.partial_cmp(&a.fitness).expect("finite fitness"));
        let mut next = Vec::with_capacity(config.population);
        for elite in ranked.iter().take(config.elitism) {
            next.push(Candidate {
                id: next_id,
                fitness: None,
                lineage: Lineage {
                    parent: Some(elite.id),
                    mutation: "elite".into(),
                },
                ..(*elite).clone()
            });
            next_id += 1;
        }
        while next.len() < config.population {
            let parent = tournament(&population, config.tournament_size, &mut rng);
            let arch = mutate(&parent.arch, space, rate, &mut rng)?;
            let changed = super::space::changed_positions(&parent.arch, &arch);
            let child = if config.inherit_params {
                Candidate {
                    id: next_id,
                    params: inherit_params(parent, &arch, &mut rng)?,
                    head: parent.head.clone(),
                    arch,
                    fitness: None,
                    lineage: Lineage {
                        parent: Some(parent.id),
                        mutation: format!("resampled positions {changed:?}"),
                    },
                }
            } else {
                let mut c = Candidate::fresh(next_id, arch, searcher.n_actions, &mut rng);
                c.lineage = Lineage {
                    parent: Some(parent.id),
                    mutation: format!("resampled positions {changed:?}, fresh parameters"),
                };
                c
            };
            next.push(child);
            next_id += 1;
        }
        population = next;
        searcher.score(generation, &mut population)?;
    }
    searcher.finish()
}

/// `population × generations` independent random candidates, logged in
/// generation-sized chunks.
pub fn random_search(
    space: &SearchSpace,
    make_env: EnvFactory<'_>,
    config: &SearchConfig,
) -> Result<SearchOutcome> {
    let mut searcher = Searcher::new(space, config, make_env)?;
    let mut rng = seeding::rng_for(config.seed, stream::SEARCH, 1);
    for generation in 0..config.generations {
        let mut batch = (0..config.population)
            .map(|slot| searcher.fresh(generation * config.population + slot, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        searcher.score(generation, &mut batch)?;
    }
    searcher.finish()
}
