//! Named random substreams derived from one master seed.
//!
//! Every consumer draws from `ChaCha8(seed)` on its own stream id, built from
//! a stream label and a task index, so results do not depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Instance = 1,
    Plaintext = 2,
    Signal = 3,
    Physical = 4,
    Artificial = 5,
    Key = 6,
}

pub fn substream(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) | (index & 0xFFFF_FFFF_FFFF));
    rng
}

/// Independent child seed for trial `index` (one SplitMix64 step).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
