//! Reproducible random streams.
//!
//! Every sample (or sampled matrix) draws from its own ChaCha8 stream: the
//! 256-bit key is expanded from the 64-bit run seed by `seed_from_u64`
//! (rand_core's PCG32 expansion), and the 64-bit ChaCha stream id is the
//! sample index. ChaCha is counter-based, so stream `i` does not depend on
//! how many other streams were consumed or on which thread ran them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
