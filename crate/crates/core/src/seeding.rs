//! Deterministic seed derivation. Every RNG in a run descends from the run
//! seed through a named stream and an index, so work can be split across
//! threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod stream {
    pub const ENV_RESET: u64 = 1;
    pub const AGENT: u64 = 2;
    pub const INIT: u64 = 3;
    pub const EVAL: u64 = 4;
    pub const SEARCH: u64 = 5;
    pub const CANDIDATE: u64 = 6;
    pub const BASELINE: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index)
}

pub fn rng_for(base: u64, stream: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(base, stream, index))
}
