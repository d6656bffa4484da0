//! Reproducible random-number substreams.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed and selected by a
//! 64-bit stream id, so trial `i` of a run always sees the same draws no matter
//! which worker executes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Independent child stream for a named purpose within the same trial.
    pub fn substream(&self, tag: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x9E37_79B9_7F4A_7C15))),
            stream_id: self.stream_id,
        }
    }

    /// Child stream keyed by a purpose and an index (e.g. a satellite id).
    pub fn keyed(&self, tag: u64, index: u64) -> Self {
        self.substream(tag).substream(index.wrapping_mul(0xD1B5_4A32_D192_ED03) ^ tag)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
