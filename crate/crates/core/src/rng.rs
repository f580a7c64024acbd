//! Deterministic random-number plumbing.
//!
//! Every stochastic operation takes an explicit `u64` seed and derives
//! independent ChaCha substreams from it by hashing context tags (class
//! index, time index, run index, purpose). ChaCha is counter-based, so
//! substreams are independent and reproducible regardless of evaluation
//! order, which keeps parallel Monte Carlo sweeps bit-deterministic.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::psd_sqrt;

/// SplitMix64 finalizer; the standard 64-bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a substream key from a base seed and a list of context tags.
pub fn derive_key(seed: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(seed);
    for &tag in tags {
        state = splitmix64(state ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    }
    state
}

/// A ChaCha stream keyed by `(seed, tags...)`.
pub fn substream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_key(seed, tags))
}

/// Tag constants so call sites read as structured paths rather than magic
/// numbers.
pub mod tag {
    pub const LATENT: u64 = 1;
    pub const OBSERVATION: u64 = 2;
    pub const RUN: u64 = 3;
    pub const TEST_DATA: u64 = 4;
    pub const CANDIDATES: u64 = 5;
    pub const PARTICLES: u64 = 6;
    pub const EM_ITER: u64 = 7;
}

/// Samples a standard normal vector of length `d`.
pub fn standard_normal_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

/// Multivariate Gaussian sampler with a precomputed PSD square-root
/// factor, so exactly singular covariances (noise-free models) are legal.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(mean: DVector<f64>, cov: &DMatrix<f64>) -> Self {
        let factor = psd_sqrt(cov);
        Self { mean, factor }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let eps = standard_normal_vector(rng, self.mean.len());
        &self.mean + &self.factor * eps
    }

    /// Sample with the mean replaced by `mean` (shared factor).
    pub fn sample_about<R: Rng + ?Sized>(&self, mean: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let eps = standard_normal_vector(rng, mean.len());
        mean + &self.factor * eps
    }
}
