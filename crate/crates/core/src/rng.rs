//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by the 64-bit seed (expanded
//! with `SeedableRng::seed_from_u64`) and selected by the 64-bit stream id.
//! Sub-streams for parallel work are carved out of a stream by positioning
//! the keystream at `index * 2^36` words, so chunk `i` draws the same numbers
//! no matter how many workers run or in which order they finish.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Words reserved for each sub-stream.
const SUBSTREAM_WORDS_LOG2: u32 = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RandomSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSeed {
    pub const fn new(seed: u64) -> Self {
        RandomSeed { seed, stream: 0 }
    }

    pub const fn with_stream(seed: u64, stream: u64) -> Self {
        RandomSeed { seed, stream }
    }

    /// Generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Generator for the `index`-th disjoint block of this stream.
    pub fn substream_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_word_pos(u128::from(index) << SUBSTREAM_WORDS_LOG2);
        rng
    }
}

impl From<u64> for RandomSeed {
    fn from(seed: u64) -> Self {
        RandomSeed::new(seed)
    }
}

/// Unit exponential draw by inversion, `-ln U` with `U` uniform on (0, 1].
#[inline]
pub fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // `random::<f64>()` is uniform on [0, 1); reflecting gives (0, 1].
    let u = 1.0 - rng.random::<f64>();
    -u.ln()
}
