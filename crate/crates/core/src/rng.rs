//! The single seeded generator behind every randomized check.
//!
//! All sampling goes through ChaCha8 keyed by `seed_from_u64`, a fully
//! specified stream cipher construction, so another implementation can
//! reproduce the same draws from the same 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}
