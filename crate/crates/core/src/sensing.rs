//! Measurement model `y = A x + e` with `A` a randomly subsampled identity.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// Derives an independent seed from a master seed and a key path, so that
/// every (sweep point, repetition, purpose) gets its own stream no matter
/// which worker runs it.
pub fn stream_seed(master: u64, keys: &[u64]) -> u64 {
    // splitmix64 finalizer, folded over the keys
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    keys.iter().fold(
        mix(master.wrapping_add(0x9e37_79b9_7f4a_7c15)),
        |acc, &k| mix(acc ^ mix(k.wrapping_add(0x9e37_79b9_7f4a_7c15))),
    )
}

/// `K x L` selection matrix stored as its sorted row positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementOperator {
    len: usize,
    indices: Vec<usize>,
    seed: u64,
}

impl MeasurementOperator {
    /// `K` distinct positions drawn uniformly from `0..L`.
    pub fn sample(len: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > len {
            return Err(Error::InvalidParameters(format!(
                "need 1 <= K <= L, got K={k}, L={len}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices = sample(&mut rng, len, k).into_vec();
        indices.sort_unstable();
        Ok(MeasurementOperator { len, indices, seed })
    }

    /// Operator with explicitly chosen rows (sorted and deduplicated).
    pub fn from_indices(len: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() || indices.last().is_some_and(|&i| i >= len) {
            return Err(Error::InvalidParameters(format!(
                "indices must be non-empty and below L={len}"
            )));
        }
        Ok(MeasurementOperator {
            len,
            indices,
            seed: 0,
        })
    }

    pub fn ambient_len(&self) -> usize {
        self.len
    }

    pub fn measurements(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("measurement input", self.len, x.len())?;
        Ok(self.indices.iter().map(|&i| x[i]).collect())
    }

    /// `A^T y`: scatter back to the sampled positions, zero elsewhere.
    pub fn adjoint_apply<T: Real>(&self, y: &[T]) -> Result<Vec<T>> {
        check_len("measurement adjoint input", self.indices.len(), y.len())?;
        let mut out = vec![T::zero(); self.len];
        for (&i, &v) in self.indices.iter().zip(y) {
            out[i] = v;
        }
        Ok(out)
    }

    /// Euclidean projection of `x` onto `{x : ||A x - y||_2 <= eta}`.
    ///
    /// Exact because the rows of `A` are orthonormal (`A A^T = I`).
    pub fn project_onto_ball<T: Real>(&self, x: &mut [T], y: &[T], eta: T) {
        let dist = self
            .indices
            .iter()
            .zip(y)
            .map(|(&i, &yi)| (x[i] - yi) * (x[i] - yi))
            .sum::<T>()
            .sqrt();
        if dist <= eta {
            return;
        }
        let shrink = eta / dist;
        for (&i, &yi) in self.indices.iter().zip(y) {
            x[i] = yi + (x[i] - yi) * shrink;
        }
    }
}

/// How the constraint radius is set from the noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    /// `eta = sigma sqrt(K)`.
    #[default]
    SigmaSqrtK,
    /// `eta = ||e||_2`, the realized noise norm.
    NoiseNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameters(format!(
                "noise level must be finite and non-negative, got {sigma}"
            )));
        }
        Ok(NoiseModel { sigma, seed })
    }

    /// Adds i.i.d. `N(0, sigma^2)` noise; returns the noisy vector and `eta`.
    pub fn corrupt<T: Real>(&self, y: &[T], rule: EtaRule) -> (Vec<T>, T) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let sigma = T::lit(self.sigma);
        let mut noise_sq = T::zero();
        let noisy = y
            .iter()
            .map(|&v| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let e = sigma * T::lit(z);
                noise_sq = noise_sq + e * e;
                v + e
            })
            .collect();
        let eta = match rule {
            EtaRule::SigmaSqrtK => sigma * T::from_usize_lossy(y.len()).sqrt(),
            EtaRule::NoiseNorm => noise_sq.sqrt(),
        };
        (noisy, eta)
    }
}
