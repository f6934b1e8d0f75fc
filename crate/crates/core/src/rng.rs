//! Counter-based random streams.
//!
//! A `(seed, stream)` pair selects an independent ChaCha8 keystream, so a
//! Monte-Carlo result is reproducible bit-for-bit per replica or block no
//! matter how the work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
