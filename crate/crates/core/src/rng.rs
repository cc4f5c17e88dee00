//! Counter-based random streams.
//!
//! Every random quantity in the simulator is addressed by a key path
//! (seed → drop → slot → BS → UE → RB) and an index within that stream, so
//! draws do not depend on evaluation order or on how drops are spread over
//! workers.

use num_traits::Float;
use rand_core::{impls, RngCore};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function, a bijective 64-bit mixer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node of the key tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn from_seed(seed: u64) -> Self {
        StreamKey(mix64(seed ^ 0x6a09_e667_f3bc_c909))
    }

    /// Key of the `tag`-th child.
    #[inline]
    pub fn child(self, tag: u64) -> Self {
        StreamKey(mix64(
            self.0 ^ mix64(tag.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        ))
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    /// The `index`-th 64-bit word of this stream.
    #[inline]
    pub fn word(self, index: u64) -> u64 {
        mix64(
            self.0
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Uniform draw in `(0, 1]`.
    #[inline]
    pub fn uniform(self, index: u64) -> f64 {
        to_unit_open_closed(self.word(index))
    }

    /// Unit-mean exponential draw (the power of a Rayleigh fade).
    #[inline]
    pub fn exp1(self, index: u64) -> f64 {
        -Float::ln(self.uniform(index))
    }

    pub fn rng(self) -> CounterRng {
        CounterRng {
            key: self,
            counter: 0,
        }
    }
}

#[inline]
fn to_unit_open_closed(w: u64) -> f64 {
    ((w >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential generator over one stream, for use with `rand` distributions.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: StreamKey,
    counter: u64,
}

impl CounterRng {
    pub fn uniform(&mut self) -> f64 {
        to_unit_open_closed(self.next_u64())
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let w = self.key.word(self.counter);
        self.counter = self.counter.wrapping_add(1);
        w
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}
