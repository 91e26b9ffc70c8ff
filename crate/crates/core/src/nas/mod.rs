//! Architecture search over fixed-length gate genomes.

pub mod search;
pub mod space;

pub use search::{
    evolutionary_search, fitness, inherit_params, random_search, Candidate, EnvFactory,
    GenerationSummary, Lineage, SearchConfig, SearchLog, SearchOutcome, SearchRecord,
    SEARCH_CSV_HEADER,
};
pub use space::{changed_positions, mutate, random_architecture, SearchSpace, WirePolicy};
