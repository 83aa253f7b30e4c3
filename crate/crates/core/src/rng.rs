//! Deterministic RNG streams. Every consumer derives its own stream from the
//! master seed and a path of integers, so results never depend on how work
//! is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags; keep stable, they are part of the reproducibility contract.
pub mod stream {
    pub const INIT_MORPHOLOGY: u64 = 1;
    pub const INIT_STIFFNESS: u64 = 2;
    pub const MUTATE_MORPHOLOGY: u64 = 3;
    pub const MUTATE_MATERIAL: u64 = 4;
    pub const PARENT_PICK: u64 = 5;
    pub const TRAIN: u64 = 6;
    pub const LOCAL_SEARCH: u64 = 7;
    pub const FINE_TUNE: u64 = 8;
    pub const EVALUATE: u64 = 9;
    pub const INIT_CONTROLLER: u64 = 10;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn derived(master: u64, path: &[u64]) -> Rng {
    seeded(derive_seed(master, path))
}
