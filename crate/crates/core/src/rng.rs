//! Counter-based random substreams.
//!
//! Every unit of parallel work (a bootstrap iteration, a simulation
//! replicate) draws from its own ChaCha stream selected by an integer key,
//! so the values it sees do not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default master seed used when callers do not supply one.
pub const DEFAULT_SEED: u64 = 20_210_516;

/// A master seed from which keyed, independent substreams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// The generator for substream `key`.
    pub fn substream(&self, key: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(key);
        rng
    }

    /// A derived seed stream, for nesting (e.g. replicate, then iteration).
    pub fn child(&self, key: u64) -> SeedStream {
        SeedStream::new(splitmix64(self.master ^ splitmix64(key.wrapping_add(0x632B_E59B_D9B4_E019))))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
