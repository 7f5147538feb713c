//! Deterministic, stream-addressable randomness.
//!
//! Every independent trial owns a `(seed, stream_id)` pair. The same pair
//! reproduces the same draw sequence on every platform, and distinct streams
//! are statistically independent, so sweeps can fan trials out across workers
//! without shared state.
//!
//! Draws (uniform, integer range, Gaussian) are implemented here on top of the
//! raw ChaCha8 output rather than going through distribution adapters, so the
//! produced values are pinned by this crate alone.

use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::num::Scalar;

/// Address of one deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngHandle {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngHandle {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Derive an independent stream for `(tag, index)`, e.g. one per trial.
    /// The derivation is a fixed hash so the mapping is stable across runs.
    pub fn substream(&self, tag: u64, index: u64) -> Self {
        let mut x = self.stream_id;
        x = splitmix64(x ^ tag.wrapping_mul(0x9e6c_63d0_876a_3f6b));
        x = splitmix64(x ^ index.wrapping_mul(0xd2b7_4407_b1ce_6e93));
        Self { seed: self.seed, stream_id: x }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> TrialRng {
        TrialRng::from_handle(self)
    }
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic generator bound to one `(seed, stream_id)`.
pub struct TrialRng {
    inner: ChaCha8Rng,
}

impl TrialRng {
    fn from_handle(handle: &RngHandle) -> Self {
        // Expand (seed, stream) into a 256-bit key with full avalanche on
        // both words.
        let mut key = [0u8; 32];
        let mut s = splitmix64(handle.seed);
        let mut t = splitmix64(handle.stream_id ^ 0x5851_f42d_4c95_7f2d);
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s ^ t);
            t = splitmix64(t.wrapping_add(0x1405_7b7e_f767_814f));
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        Self { inner: ChaCha8Rng::from_seed(key) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 random mantissa bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_scalar<T: Scalar>(&mut self) -> T {
        T::of(self.uniform())
    }

    /// Uniform integer in `[0, n)` (Lemire's multiply-shift, unbiased).
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() needs a non-empty range");
        let n = n as u64;
        let mut x = self.next_u64();
        let mut m = (x as u128).wrapping_mul(n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128).wrapping_mul(n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Two independent standard normal draws (Marsaglia polar method).
    pub fn gaussian_pair(&mut self) -> (f64, f64) {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let k = (-2.0 * s.ln() / s).sqrt();
                return (u * k, v * k);
            }
        }
    }

    /// Circular complex Gaussian with the given per-axis standard deviation.
    pub fn complex_gaussian<T: Scalar>(&mut self, sigma_axis: T) -> Complex<T> {
        let (g_re, g_im) = self.gaussian_pair();
        Complex::new(sigma_axis * T::of(g_re), sigma_axis * T::of(g_im))
    }
}
