//! Deterministic seed derivation for independent random streams.
//!
//! Each episode owns several RNG streams (latency draws, judge noise,
//! query sampling, load spikes, policy exploration). Deriving them from
//! the episode seed with distinct tags keeps the streams independent, so
//! e.g. a policy consuming exploration randomness never perturbs the
//! environment's latency draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const TAG_LATENCY: u64 = 1;
pub(crate) const TAG_JUDGE: u64 = 2;
pub(crate) const TAG_QUERY_STREAM: u64 = 3;
pub(crate) const TAG_LOAD_SPIKES: u64 = 4;
pub(crate) const TAG_POLICY: u64 = 5;
pub(crate) const TAG_SYNTH_POOL: u64 = 6;

/// splitmix64 finalizer; full-period mixing of (seed, tag) into a stream seed.
pub(crate) fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seeded stream for (episode seed, purpose tag).
pub(crate) fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag))
}
