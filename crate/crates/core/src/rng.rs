//! Seeded randomness.
//!
//! All draws go through [`Rng`], a ChaCha8 stream keyed by a 64-bit seed.
//! ChaCha output is specified bit-for-bit, so a seed reproduces the same
//! stream on every platform. Trials derive their seed as `base + trial_index`
//! and split purposes (signal, ensemble, noise) onto separate ChaCha streams.

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::types::CVector;

/// Name of the generator, recorded in experiment outputs.
pub const GENERATOR: &str = "chacha8";

/// Independent sub-streams of a trial seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Main = 0,
    Signal = 1,
    Ensemble = 2,
    Noise = 3,
    Fallback = 4,
}

#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, Stream::Main)
    }

    pub fn with_stream(seed: u64, stream: Stream) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream as u64);
        Rng { seed, inner }
    }

    /// Generator for trial `index` of a run seeded with `base`.
    pub fn for_trial(base: u64, index: u64, stream: Stream) -> Self {
        Self::with_stream(base.wrapping_add(index), stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    #[inline]
    pub fn below(&mut self, n: u32) -> u32 {
        self.inner.gen_range(0..n)
    }

    /// `scale·(N(0,1) + jN(0,1))`.
    #[inline]
    pub fn complex_normal(&mut self, scale: f64) -> Complex64 {
        let re = self.normal();
        let im = self.normal();
        Complex64::new(scale * re, scale * im)
    }
}

/// Vector of `n` entries with independent `N(0, scale²)` real and imaginary parts.
pub fn complex_gaussian_vector(rng: &mut Rng, n: usize, scale: f64) -> Result<CVector> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    Ok(CVector::from_raw(
        (0..n).map(|_| rng.complex_normal(scale)).collect(),
    ))
}

/// Vector of `n` real `N(0, scale²)` entries.
pub fn real_gaussian_vector(rng: &mut Rng, n: usize, scale: f64) -> Result<CVector> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    Ok(CVector::from_raw(
        (0..n).map(|_| Complex64::new(scale * rng.normal(), 0.0)).collect(),
    ))
}
