//! Reproducible random streams.
//!
//! Every Monte Carlo replicate draws from its own ChaCha8 stream selected
//! by `(seed, stream)`, so results depend only on the master seed and the
//! replicate index, never on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ReplicateRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ReplicateRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; derives independent sub-seeds from a master seed.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
