//! Seeded randomness for the stochastic strategies.
//!
//! Generator: ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded with
//! `seed_from_u64`, which expands the 64-bit seed through PCG32 into the
//! 256-bit ChaCha key. Only raw `next_u64` outputs are consumed; the
//! conversions to floats and bounded integers are defined here so the
//! streams do not depend on a particular `rand` release.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier written into output headers.
pub const PRNG_NAME: &str = "chacha8-seed_from_u64";

pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)` from the top 53 bits of one output.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `0..bound` by rejection sampling. `bound` must be non-zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }
}
