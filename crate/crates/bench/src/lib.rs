//! Shared fixtures for the criterion benches under `benches/`.

use hypermatch_core::constructions::divisibility_barrier;
use hypermatch_core::{generate, Hypergraph, Model};

/// Dense random 3-graph on `n` vertices.
pub fn dense_random(n: usize, seed: u64) -> Hypergraph {
    generate(n, 3, Model::Random { p: 0.9, seed }).expect("valid parameters")
}

/// A divisibility barrier with no near perfect matching, so the exact
/// solver has to exhaust its search.
pub fn hard_barrier() -> Hypergraph {
    divisibility_barrier(14, 4, 2, 0, 3).expect("admissible instance").0
}
