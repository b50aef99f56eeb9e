//! Deterministic random streams keyed by a seed and a path of indices.
//!
//! Every stochastic step (data replicate `r`, bootstrap replicate `b`) owns
//! a generator derived from `(seed, r, b)`, so results never depend on how
//! work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for index `idx` under `seed`.
pub fn derive_seed(seed: u64, idx: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(idx.wrapping_add(0xA5A5_5A5A_1234_5678)))
}

/// Generator for the stream `(seed, path[0], path[1], ...)`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let s = path.iter().fold(seed, |acc, &p| derive_seed(acc, p));
    ChaCha8Rng::seed_from_u64(s)
}
