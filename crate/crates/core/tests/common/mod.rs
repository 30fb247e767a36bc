#![allow(dead_code, clippy::needless_range_loop)]

pub mod checks;
pub mod oracles;
pub mod random;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
