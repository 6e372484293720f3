//! Seed contract shared by every sampler.
//!
//! All randomness comes from ChaCha8 keyed by a 64-bit master seed. Each
//! trajectory or path `i` reads its own stream `i`, so results do not depend
//! on how work is split across threads. Independent roles inside one
//! estimator (outer and inner paths, for instance) use distinct derived
//! seeds from [`sub_seed`].

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A seed for an independent role `tag` derived from `seed`.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    stream_rng(seed, u64::MAX - tag).next_u64()
}
