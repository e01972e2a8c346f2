//! Deterministic random streams.
//!
//! Every random draw in the crate goes through [`seeded_rng`], which wraps
//! ChaCha8. ChaCha output is specified bit-for-bit independently of the
//! platform's endianness or word size, so a seed reproduces the same stream on
//! any machine.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` for the same seed (used so that, e.g., noise
/// injection does not replay the draws used for sampling the clean data).
pub fn seeded_stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
