//! Seedable, splittable random streams.
//!
//! Every randomized component derives its generator from a master seed plus a
//! path of integer tags, so parallel and serial execution orders produce
//! bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// A point in a tree of derived random streams.
///
/// `RngStream::new(master).child(a).child(b)` names one stream; calling
/// [`RngStream::rng`] instantiates a generator for it. Children with distinct
/// tags are statistically independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream {
            state: splitmix(master_seed ^ 0x9e37_79b9_7f4a_7c15),
        }
    }

    /// Derive a sub-stream identified by `tag`.
    pub fn child(&self, tag: u64) -> Self {
        RngStream {
            state: splitmix(self.state ^ splitmix(tag.wrapping_add(0xbf58_476d_1ce4_e5b9))),
        }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.state)
    }

    /// The stream's identity as a seed value, for handing off to components
    /// that take a plain master seed.
    pub fn as_u64(&self) -> u64 {
        self.state
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
