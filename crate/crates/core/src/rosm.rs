//! Random optimal state method (ROSM) for choosing the RIS control matrix.
//!
//! `T` unit-amplitude candidates with random phases are probed and the one
//! with the largest received signal power `SRP = ‖y‖²/K` is kept. Only the
//! received power is used, so no channel state information is needed.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::noise::{calibrate_sigma2, NoiseConfig, NoiseGenerator};
use crate::scene::{incident_signal, RisControlMatrix, SceneConfig};
use crate::{CMatrix, CVector, Error, Result};

/// Phase alphabet of the RIS elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PhaseSet {
    /// Uniform on `[0, 2π)`.
    #[default]
    Continuous,
    /// `2^bits` equally spaced phases starting at 0.
    Quantized(u32),
}

/// How each candidate's received power is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProbeMode {
    /// One noisy measurement per candidate, as a physical power probe would see.
    #[default]
    Noisy,
    /// The clean `G·z`; for testing.
    Noiseless,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RosmConfig {
    /// Candidate count `T`.
    pub candidates: usize,
    pub phases: PhaseSet,
    pub seed: u64,
    pub probe: ProbeMode,
}

impl Default for RosmConfig {
    fn default() -> Self {
        Self {
            candidates: 64,
            phases: PhaseSet::Continuous,
            seed: 0,
            probe: ProbeMode::Noisy,
        }
    }
}

/// First noise stream used for probing; stream `PROBE_STREAM + t` belongs
/// to candidate `t`, leaving the low streams to the measurement itself.
pub const PROBE_STREAM: u64 = 1 << 32;

impl RosmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.candidates == 0 {
            return Err(Error::param("candidates", "at least one candidate is required"));
        }
        if let PhaseSet::Quantized(bits) = self.phases {
            if !(1..=30).contains(&bits) {
                return Err(Error::param("phases", "quantisation needs 1..=30 bits"));
            }
        }
        Ok(())
    }
}

/// Candidate `t`; deterministic in `(cfg.seed, t)`.
pub fn candidate(cfg: &RosmConfig, slots: usize, elements: usize, t: usize) -> Result<RisControlMatrix> {
    cfg.validate()?;
    if t >= cfg.candidates {
        return Err(Error::param(
            "t",
            alloc::format!("candidate index {t} out of range for T = {}", cfg.candidates),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(t as u64);
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut g = CMatrix::zeros(slots, elements);
    for k in 0..slots {
        for m in 0..elements {
            let phase = match cfg.phases {
                PhaseSet::Continuous => rng.random::<f64>() * two_pi,
                PhaseSet::Quantized(bits) => {
                    let levels = 1u64 << bits;
                    two_pi * rng.random_range(0..levels) as f64 / levels as f64
                }
            };
            g[(k, m)] = Complex64::from_polar(1.0, phase);
        }
    }
    Ok(RisControlMatrix::new(g))
}

/// Received signal power `‖y‖² / K`.
pub fn srp(y: &CVector) -> f64 {
    if y.is_empty() {
        0.0
    } else {
        y.norm_squared() / y.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RosmOutcome {
    pub g: RisControlMatrix,
    /// Index of the chosen candidate.
    pub index: usize,
    /// Probed SRP of the chosen candidate.
    pub srp: f64,
    /// Probed SRP of every candidate, by index.
    pub probed: Vec<f64>,
}

/// Chooses the candidate with maximal probed SRP; ties go to the lowest index.
pub fn optimize(scene: &SceneConfig, cfg: &RosmConfig, noise: &NoiseConfig) -> Result<RosmOutcome> {
    scene.validate()?;
    let z = incident_signal(scene);
    optimize_for_signal(&z, scene.slots, cfg, noise)
}

/// [`optimize`] for an already synthesised RIS-incident signal `z`.
pub fn optimize_for_signal(z: &CVector, slots: usize, cfg: &RosmConfig, noise: &NoiseConfig) -> Result<RosmOutcome> {
    cfg.validate()?;
    let sigma2 = match cfg.probe {
        ProbeMode::Noisy => Some(calibrate_sigma2(z, noise.snr_db)?),
        ProbeMode::Noiseless => None,
    };
    let mut probed = Vec::with_capacity(cfg.candidates);
    let mut best: Option<(usize, f64, RisControlMatrix)> = None;
    for t in 0..cfg.candidates {
        let g = candidate(cfg, slots, z.len(), t)?;
        let mut y = g.measure(z)?;
        if let Some(s2) = sigma2 {
            let mut gen = NoiseGenerator::with_stream(noise, PROBE_STREAM + t as u64)?;
            y += gen.sample(slots, s2);
        }
        let power = srp(&y);
        probed.push(power);
        if best.as_ref().is_none_or(|b| power > b.1) {
            best = Some((t, power, g));
        }
    }
    let (index, srp, g) = best.expect("at least one candidate");
    Ok(RosmOutcome { g, index, srp, probed })
}
