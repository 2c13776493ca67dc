use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Handle to one reproducible random stream.
///
/// A stream is addressed by (seed, stream id); the generator underneath is
/// counter-based (ChaCha), so the pair fully determines the sequence and
/// distinct stream ids give statistically independent streams. Child
/// streams are derived by mixing the parent id with the child index, which
/// lets samplers fan out deterministically without coordination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn root(seed: u64) -> Self {
        RngStream { seed, stream_id: 0 }
    }

    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derived stream for worker/replica `idx`.
    pub fn child(&self, idx: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_id: splitmix(self.stream_id ^ splitmix(idx.wrapping_add(1))),
        }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
