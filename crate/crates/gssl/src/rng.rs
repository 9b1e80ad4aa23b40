//! Seedable, splittable randomness.
//!
//! All randomness in the crate flows from a `u64` base seed through
//! ChaCha8, a counter-based generator with 2^64 independent streams.
//! Repetition `i` of an experiment uses stream `i` of the base seed, so
//! repetitions are order-independent and replayable in isolation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide RNG.
pub type Rng = ChaCha8Rng;

/// Root generator for a seed (stream 0).
pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
