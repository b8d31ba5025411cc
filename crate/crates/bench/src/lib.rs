//! Benchmark inputs shared by the criterion benches.

use emu_core::random::{random_game, GameShape};
use emu_core::WeightedGameStructure;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A reproducible random game with exactly `vars` variables.
pub fn game(vars: usize, seed: u64) -> WeightedGameStructure {
    let shape = GameShape {
        min_vars: vars,
        max_vars: vars,
        max_weight: 3,
    };
    random_game(&mut ChaCha8Rng::seed_from_u64(seed), &shape)
}
