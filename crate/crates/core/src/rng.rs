//! Counter-based random streams.
//!
//! Every draw is addressed by `(master seed, substream index)`, so a sample's
//! value does not depend on which thread produced it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for one substream of a master seed.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
