//! Seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream whose 64-bit seed
//! is derived from a user seed plus a path of stream identifiers (stage,
//! restart, evaluation counter, ...). Identical paths give identical streams
//! regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `seed` with a path of stream identifiers into a child seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &id| {
            splitmix64(acc.rotate_left(23) ^ splitmix64(id ^ 0x632b_e59b_d9b4_e019))
        })
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}
