//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! `(seed, purpose, index)` triple. Sub-blocks of a single draw (rows of a
//! spectral coefficient array, for instance) use separate stream ids under
//! the same key, so a parallel consumer reproduces serial output exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// What a stream is used for. Distinct purposes never share key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Field,
    TestSet,
    Root,
    Passage,
    EulerWalk,
    Measure,
    Synthetic,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Field => 0x66_6965_6c64,
            Purpose::TestSet => 0x73_6574,
            Purpose::Root => 0x726f_6f74,
            Purpose::Passage => 0x7061_7373,
            Purpose::EulerWalk => 0x65_756c_6572,
            Purpose::Measure => 0x6d65_6173,
            Purpose::Synthetic => 0x7379_6e74,
        }
    }
}

#[inline]
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A keyed family of streams; `block(k)` hands out independent sub-streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    key: [u8; 32],
}

impl StreamKey {
    pub fn new(seed: u64, purpose: Purpose, index: u64) -> Self {
        let mut state = splitmix64(seed) ^ splitmix64(purpose.tag().rotate_left(17));
        state = splitmix64(state ^ splitmix64(index.wrapping_add(0x5151)));
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { key }
    }

    /// Sub-stream `block` of this key.
    pub fn block(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(block);
        rng
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.block(0)
    }
}

/// Shorthand for `StreamKey::new(seed, purpose, index).rng()`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    StreamKey::new(seed, purpose, index).rng()
}

/// Seed of member `index` of an ensemble started from `seed`.
pub fn member_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ 0x656e_7365_6d62) ^ index)
}
