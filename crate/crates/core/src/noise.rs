//! Bernoulli–Gaussian impulsive noise.
//!
//! Each sample is `v = b·w1 + w2` where `b ~ Bernoulli(κ)`, `w1` is circular
//! complex Gaussian with variance `σ1² = ratio·σ2²` and `w2` is circular
//! complex Gaussian with variance `σ2²`. The per-sample variance is therefore
//! `κσ1² + σ2²`.
//!
//! The SNR is referenced to the RIS-incident signal: `SNR = ‖z‖² / σ2²`,
//! with no per-element normalisation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{CVector, Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NoiseConfig {
    /// Impulse probability `κ` per sample.
    pub kappa: f64,
    /// `σ1² / σ2²`.
    pub variance_ratio: f64,
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            kappa: 0.1,
            variance_ratio: 100.0,
            snr_db: 10.0,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::param("kappa", "must lie in [0, 1]"));
        }
        if !(self.variance_ratio > 0.0) {
            return Err(Error::param("variance_ratio", "must be positive"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::param("snr_db", "must be finite"));
        }
        Ok(())
    }

    /// Total per-sample variance `κσ1² + σ2²` for a given background `σ2²`.
    pub fn total_variance(&self, sigma2_sq: f64) -> f64 {
        (self.kappa * self.variance_ratio + 1.0) * sigma2_sq
    }
}

/// Background variance `σ2² = ‖z‖² / 10^(snr/10)`.
pub fn calibrate_sigma2(z: &CVector, snr_db: f64) -> Result<f64> {
    let energy = z.norm_squared();
    if !(energy > 0.0) {
        return Err(Error::ZeroSignal);
    }
    Ok(energy / 10f64.powf(snr_db / 10.0))
}

/// Seeded impulsive-noise source. One generator per trial; never shared.
#[derive(Debug, Clone)]
pub struct NoiseGenerator {
    rng: ChaCha8Rng,
    kappa: f64,
    variance_ratio: f64,
}

impl NoiseGenerator {
    pub fn new(cfg: &NoiseConfig) -> Result<Self> {
        Self::with_stream(cfg, 0)
    }

    /// Independent stream `stream` under the same seed.
    pub fn with_stream(cfg: &NoiseConfig, stream: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        Ok(Self {
            rng,
            kappa: cfg.kappa,
            variance_ratio: cfg.variance_ratio,
        })
    }

    /// `len` samples with background variance `sigma2_sq`.
    pub fn sample(&mut self, len: usize, sigma2_sq: f64) -> CVector {
        self.sample_flagged(len, sigma2_sq).0
    }

    /// Like [`sample`](Self::sample) but also reports which samples carry an
    /// impulse.
    pub fn sample_flagged(&mut self, len: usize, sigma2_sq: f64) -> (CVector, alloc::vec::Vec<bool>) {
        let sigma2_sq = sigma2_sq.max(0.0);
        let impulse_var = self.variance_ratio * sigma2_sq;
        let mut flags = alloc::vec::Vec::with_capacity(len);
        let mut out = CVector::zeros(len);
        for v in out.iter_mut() {
            // All four Gaussian components are always drawn so the stream
            // layout does not depend on the Bernoulli outcomes.
            let hit = self.rng.random::<f64>() < self.kappa;
            let w1 = circular_gaussian(&mut self.rng, impulse_var);
            let w2 = circular_gaussian(&mut self.rng, sigma2_sq);
            *v = if hit { w1 + w2 } else { w2 };
            flags.push(hit);
        }
        (out, flags)
    }
}

/// Convenience: `len` samples from a fresh generator seeded by `cfg.seed`.
pub fn sample_noise(len: usize, sigma2_sq: f64, cfg: &NoiseConfig) -> Result<CVector> {
    Ok(NoiseGenerator::new(cfg)?.sample(len, sigma2_sq))
}

/// Real and imaginary parts each with variance `variance / 2`.
pub(crate) fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

#[cfg(test)]
pub(crate) fn circular_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    CVector::from_fn(len, |_, _| circular_gaussian(rng, variance))
}
