//! Reproducible split-stream randomness.
//!
//! A [`RandomSource`] is a `(seed, stream_id)` pair; the generator behind it
//! is ChaCha8 keyed by the seed with the stream id as its nonce, so
//! replication `r` of a Monte Carlo experiment always draws from stream `r`
//! no matter which worker runs it.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// The same seed on another stream.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> Rng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        Rng { inner }
    }
}

/// Draw interface handed to samplers.
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`, safe to pass to `ln`.
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Exponential with the given rate; `rate <= 0` gives `+inf`.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        if rate <= 0.0 {
            return f64::INFINITY;
        }
        -libm::log(self.uniform_open0()) / rate
    }

    /// Index drawn from nonnegative weights (need not be normalized).
    /// Returns `None` if the total weight is not positive.
    pub fn categorical(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return None;
        }
        let target = self.uniform() * total;
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last_positive = Some(i);
            if target < acc {
                return Some(i);
            }
        }
        last_positive
    }
}
