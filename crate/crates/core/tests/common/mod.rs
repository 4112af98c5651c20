#![allow(dead_code)]

pub mod language_oracle;
pub mod mle_oracle;
pub mod rank_oracle;
pub mod selector_oracle;
pub mod suffix_oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
