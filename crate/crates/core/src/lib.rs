//! Doubly-stochastic relaxation of graph matching for symmetric graphs.
//!
//! The crate covers permutation groups and their invariant matrix spaces,
//! certificates for when the relaxation is exact, solvers over the Birkhoff
//! polytope, extraction of permutations from relaxed solutions, and the
//! experiment drivers used by the `dsmatch` binary and the examples.

pub mod dsopt;
pub mod error;
pub mod exactness;
pub mod experiments;
pub mod groupspace;
pub mod linalg;
pub mod permgroup;
pub mod projection;

pub use error::{Error, Result};
pub use groupspace::SymGraph;
pub use permgroup::{OrbitPartition, PermGroup, Permutation, SupportMask};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random stream for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
