use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate; streams are stable across platforms.
pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
