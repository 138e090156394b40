use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Seeded pseudorandom source.
///
/// Backed by ChaCha8 (`rand_chacha`), whose output stream is fixed for a
/// given seed on every platform. Floats are built from the top 53 bits of
/// each `u64`; Gaussian samples use the Box–Muller transform, one pair per
/// two uniforms, so the sequence depends only on the seed and call order.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Rng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One uniform draw in `[lo, hi)`. Caller guarantees `lo < hi`.
    pub(crate) fn uniform_scalar(&mut self, lo: f64, hi: f64) -> f64 {
        let v = lo + (hi - lo) * self.next_f64();
        // lo + span*u can round up to hi when span is large relative to lo
        if v >= hi {
            hi.next_down()
        } else {
            v
        }
    }

    /// `n` independent draws from `U[lo, hi)`.
    pub fn uniform(&mut self, n: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!(
                "uniform range requires finite lo < hi, got [{lo}, {hi})"
            )));
        }
        Ok((0..n).map(|_| self.uniform_scalar(lo, hi)).collect())
    }

    /// `n` independent draws from `N(mean, sigma^2)`.
    pub fn normal(&mut self, n: usize, mean: f64, sigma: f64) -> Result<Vec<f64>> {
        if !(sigma >= 0.0) || !sigma.is_finite() || !mean.is_finite() {
            return Err(Error::invalid(format!(
                "normal requires finite mean and sigma >= 0, got mean {mean}, sigma {sigma}"
            )));
        }
        let mut out = Vec::with_capacity(n + 1);
        while out.len() < n {
            let (a, b) = self.standard_normal_pair();
            out.push(mean + sigma * a);
            out.push(mean + sigma * b);
        }
        out.truncate(n);
        Ok(out)
    }

    fn standard_normal_pair(&mut self) -> (f64, f64) {
        // 1 - u lies in (0, 1], keeping ln finite
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}
