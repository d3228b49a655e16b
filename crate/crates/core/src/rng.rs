//! Portable seeded randomness.
//!
//! All stochastic steps draw from ChaCha8 (8-round ChaCha keystream, the
//! `rand_chacha` `ChaCha8Rng`) seeded through `seed_from_u64`, which expands
//! the 64-bit seed with PCG32 (multiplier `6364136223846793005`, increment
//! `11634580027462260723`). On top of the raw 64-bit stream:
//!
//! * uniform doubles take the top 53 bits: `(u >> 11) * 2^-53`, in `[0, 1)`;
//! * standard normals use the Box–Muller transform on `u1 = 1 - uniform()`
//!   and `u2 = uniform()`, returning the cosine branch and caching the sine
//!   branch for the next call;
//! * bounded integers use rejection sampling on the raw stream;
//! * shuffles are Fisher–Yates from the last index down.
//!
//! Sub-streams for independent consumers are derived by mixing a stream name
//! into the root seed with 64-bit FNV-1a, so every draw in a run traces back
//! to one root seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// An independent stream keyed by `name` under the root `seed`.
    pub fn derive(seed: u64, name: &str) -> Self {
        Self::new(derive_seed(seed, name))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

pub fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    seed ^ h
}
