//! Deterministic seed derivation for reproducible experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SolverRng = ChaCha8Rng;

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of instance `instance_id` under a base seed.
/// Distinct triples give independent streams regardless of scheduling order.
pub fn derive_seed(seed: u64, instance_id: u64, trial: u64) -> u64 {
    mix(mix(mix(seed) ^ instance_id) ^ trial)
}

pub fn rng_for(seed: u64, instance_id: u64, trial: u64) -> SolverRng {
    SolverRng::seed_from_u64(derive_seed(seed, instance_id, trial))
}

pub fn rng(seed: u64) -> SolverRng {
    SolverRng::seed_from_u64(seed)
}

/// Uniform threshold in `(0, 1]`, so a zero entry is never selected and a one
/// is always selected.
#[inline]
pub(crate) fn threshold<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
