//! Reproducible random streams.
//!
//! Every path or replication draws from its own ChaCha8 stream derived from a
//! master seed and an index, so results do not depend on thread scheduling or
//! on how many other paths are simulated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Environment variable consulted when no seed is given explicitly.
pub const SEED_ENV: &str = "GLBREAK_SEED";

/// Seed used when neither an explicit seed nor the environment provides one.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for a named sub-experiment, so that distinct experiments sharing a
/// master seed do not share streams.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    // SplitMix64 finalizer.
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Explicit seed, else `GLBREAK_SEED`, else [`DEFAULT_SEED`].
pub fn resolve_seed(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()))
        .unwrap_or(DEFAULT_SEED)
}
