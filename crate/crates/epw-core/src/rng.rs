//! Seeded random streams. A single 64-bit seed fans out to independent
//! ChaCha8 streams, one per purpose, so that adding draws for one purpose
//! never shifts the values seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id for surrogate-solution coefficients.
pub const STREAM_SURROGATE: u64 = 1;
/// Stream id for parameter-node sampling (strategies b and d).
pub const STREAM_NODES: u64 = 2;
/// Stream id for the jitter applied to extremal-point initializations.
pub const STREAM_EXTREMAL: u64 = 3;

/// ChaCha8 generator keyed by `seed` on the given stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
