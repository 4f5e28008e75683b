//! Deterministic random streams.
//!
//! Every random quantity in a run is drawn from a ChaCha stream whose seed is
//! derived from the master seed and a short path of integers (scenario key,
//! trial index, purpose). Streams with different paths are independent for
//! all practical purposes, and the same path always yields the same stream
//! regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream purposes within a trial.
pub const PLACEMENT: u64 = 1;
pub const SHADOWING: u64 = 2;
pub const BOOTSTRAP: u64 = 0xB007;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `path` into `seed`, producing a child seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(seed: u64, path: &[u64]) -> Stream {
    Stream::seed_from_u64(derive_seed(seed, path))
}
