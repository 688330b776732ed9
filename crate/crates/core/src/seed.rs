//! Schedule-independent randomness.
//!
//! Every random decision is drawn from a generator keyed by the master seed
//! and a path of integers naming the decision (level, cell index, stream id,
//! ...). Two runs with the same seed see the same streams no matter how the
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

// Stream tags, so unrelated consumers of the same seed never share a stream.
pub(crate) const STREAM_PERCOLATION: u64 = 0x7065_7263;
pub(crate) const STREAM_CENTERS: u64 = 0x6365_6e74;
pub(crate) const STREAM_TUBES: u64 = 0x7475_6265;
pub(crate) const STREAM_DIRECTIONS: u64 = 0x6469_7273;
pub(crate) const STREAM_BILIPSCHITZ: u64 = 0x626c_6970;

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed(seed)
    }

    /// Stable 64-bit key for `path` under this seed.
    pub fn derive_key(self, path: &[u64]) -> u64 {
        let mut h = splitmix64(self.0 ^ 0x9e37_79b9_7f4a_7c15);
        for &p in path {
            h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019)));
        }
        h
    }

    pub fn rng(self, path: &[u64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive_key(path))
    }
}

impl From<u64> for RngSeed {
    fn from(value: u64) -> Self {
        RngSeed(value)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
