//! Seeded random substreams.
//!
//! Every random draw is addressed by `(seed, domain, index)`, so the value of
//! draw `index` never depends on how many draws came before it or on which
//! worker produced it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Beam-pointing mismatch angles.
pub const DOMAIN_MISMATCH: u32 = 1;
/// Nearest-BS distance drops.
pub const DOMAIN_PLACEMENT: u32 = 2;

pub fn substream(seed: u64, domain: u32, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 32) | index as u64);
    rng
}
