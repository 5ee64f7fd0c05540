//! (2k-1)-stretch distance oracles for undirected graphs: the classic
//! bunch/pivot oracle, parameterized variants relative to a vertex set, the
//! hierarchical oracle over restricted graphs, and the spanner-assisted
//! end-to-end constructions, together with an exact-distance audit harness.

pub mod audit;
pub mod bunch;
pub mod constructions;
pub mod error;
pub mod graph;
pub mod hado;
pub mod param;
pub mod serialize;
pub mod spanner;

pub use error::{Error, Result};
pub use graph::{Graph, NearestInfo, INF, NONE};

use rand::SeedableRng;

pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}
