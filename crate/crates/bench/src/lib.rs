//! Fixtures shared by the benchmarks.

use ridenuc_core::{parse_instance, Game, Instance};

pub const PROB10C: &str = include_str!("../../../data/prob10c.txt");
pub const PROB10D: &str = include_str!("../../../data/prob10d.txt");

pub fn prob10c() -> Instance {
    parse_instance(PROB10C).expect("bundled instance parses")
}

pub fn prob10d() -> Instance {
    parse_instance(PROB10D).expect("bundled instance parses")
}

/// Seeded random game with `n` players and capacity `q`.
pub fn random_game(n: usize, q: usize, seed: u64) -> Game {
    Game::from_instance(&Instance::random(n, q, seed).expect("valid size")).expect("solvable")
}
