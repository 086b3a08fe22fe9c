//! Reproducible random streams.
//!
//! Every replica owns a 64-bit seed. Each stochastic component (network
//! generation, initial sensor mapping, start pose, rewiring, sensitivity
//! sampling) draws from its own ChaCha8 stream keyed by that seed, so a
//! component can be exercised in isolation without shifting the draws seen
//! by the others. ChaCha8 output is specified bit-for-bit and is identical
//! on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream identifiers within one replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Network,
    Mapping,
    Pose,
    Rewire,
    Sensitivity,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Network => 0,
            Stream::Mapping => 1,
            Stream::Pose => 2,
            Stream::Rewire => 3,
            Stream::Sensitivity => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReplicaStreams {
    seed: u64,
}

impl ReplicaStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, stream: Stream) -> SimRng {
        seeded_stream(self.seed, stream.id())
    }
}

/// A ChaCha8 generator for `(seed, stream)`.
pub fn seeded_stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Folds a sequence of words into one seed with chained SplitMix64 rounds.
pub fn mix_seed(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}
