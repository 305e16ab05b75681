//! Counter-based seed streams.
//!
//! Every consumer of randomness derives its generator from the pair
//! `(seed, stream)`. ChaCha keeps a 64-bit stream id separate from the key,
//! so adding a new consumer with a fresh stream id never perturbs the numbers
//! drawn by existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Well-known stream ids. Ensemble members use `base + member index`.
pub mod streams {
    pub const SPECKLE: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const REFERENCE: u64 = 3;
    pub const ENSEMBLE_SIGNAL: u64 = 1 << 32;
    pub const ENSEMBLE_REFERENCE: u64 = 2 << 32;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
