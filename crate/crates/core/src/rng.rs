//! Seedable, splittable random streams.
//!
//! All randomness flows from a single 64-bit master seed. Independent
//! streams are derived with a counter-based SplitMix64 mix of the parent
//! seed and a stream index, so a replicate's stream depends only on
//! (master seed, indices along the split path) and never on thread
//! scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// SplitMix64 output mix.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a parent seed and a stream index.
#[inline]
pub fn split_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// The generator used throughout: ChaCha12, seeded from a 64-bit value.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Rng {
        Rng {
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Child generator for stream `index`; streams with distinct indices
    /// are independent.
    pub fn split(&self, base_seed: u64, index: u64) -> Rng {
        let _ = self;
        Rng::from_seed(split_seed(base_seed, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in 0..bound.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        // widening-multiply rejection-free mapping is biased by < 2^-64;
        // use simple rejection to stay exact
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let r = self.inner.next_u64();
            if r <= zone {
                return r % bound;
            }
        }
    }
}

/// Convenience for a stream derived directly from (seed, index).
pub fn stream(seed: u64, index: u64) -> Rng {
    Rng::from_seed(split_seed(seed, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism() {
        let mut a = Rng::from_seed(42);
        let mut b = Rng::from_seed(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = stream(42, 0);
        let mut b = stream(42, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = Rng::from_seed(7);
        for _ in 0..1000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn below_is_in_range() {
        let mut r = Rng::from_seed(7);
        for bound in [1u64, 2, 3, 10, 1000] {
            for _ in 0..100 {
                assert!(r.below(bound) < bound);
            }
        }
    }
}
