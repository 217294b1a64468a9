//! Measurement model of a RIS-aided single-antenna receiver.
//!
//! `N` far-field targets illuminate a uniform linear RIS with `M` elements.
//! During each of `K` time slots the RIS applies one row of the control
//! matrix `G` and the antenna records a single complex sample, so the whole
//! observation is the length-`K` vector `y = G·A(θ)·x + v`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::{deg_to_rad, CMatrix, CVector, Error, Result};

/// Geometry, targets and path-loss constants of one experiment.
///
/// Angles are in degrees and distances in metres. The number of targets `N`
/// is the common length of the per-target lists.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SceneConfig {
    /// RIS element count `M`.
    pub elements: usize,
    /// Time-slot count `K`.
    pub slots: usize,
    /// Adjacent-element spacing in wavelengths.
    pub spacing: f64,
    /// Azimuth of the receive antenna seen from the RIS.
    pub varphi_deg: f64,
    /// Target DOAs.
    pub theta_deg: Vec<f64>,
    /// Target-to-RIS distances `d_{s,n}`.
    pub target_distance: Vec<f64>,
    /// RIS-to-antenna distance `d_r`.
    pub ris_antenna_distance: f64,
    /// Per-target path-loss constants `α_n`.
    pub alpha: Vec<f64>,
    /// RIS-to-antenna path-loss constant `γ`.
    pub gamma: f64,
    /// Complex baseband source amplitudes `s_n`.
    pub source: Vec<Complex64>,
    /// Admissible DOA interval `(low, high)`, open at both ends.
    pub angle_range: (f64, f64),
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            elements: 32,
            slots: 128,
            spacing: 0.5,
            varphi_deg: 10.0,
            theta_deg: vec![-20.0, 0.0, 25.0],
            target_distance: vec![30.0; 3],
            ris_antenna_distance: 3.0,
            alpha: vec![1.0; 3],
            gamma: 1.0,
            source: vec![Complex64::new(1.0, 0.0); 3],
            angle_range: (-40.0, 40.0),
        }
    }
}

impl SceneConfig {
    /// Number of targets `N`.
    pub fn targets(&self) -> usize {
        self.theta_deg.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.targets();
        if self.elements == 0 || self.slots == 0 {
            return Err(Error::config("elements and slots must be at least 1"));
        }
        if n == 0 {
            return Err(Error::config("at least one target is required"));
        }
        if n > self.elements {
            return Err(Error::config(format!(
                "{n} targets exceed {} RIS elements",
                self.elements
            )));
        }
        for (name, len) in [
            ("target_distance", self.target_distance.len()),
            ("alpha", self.alpha.len()),
            ("source", self.source.len()),
        ] {
            if len != n {
                return Err(Error::config(format!(
                    "`{name}` has {len} entries but there are {n} targets"
                )));
            }
        }
        if !(self.spacing > 0.0) {
            return Err(Error::config("element spacing must be positive"));
        }
        if !(self.ris_antenna_distance > 0.0) || self.target_distance.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::config("all distances must be positive"));
        }
        let (lo, hi) = self.angle_range;
        if !(lo < hi) {
            return Err(Error::config("angle range must satisfy low < high"));
        }
        for (i, &t) in self.theta_deg.iter().enumerate() {
            if !(t > lo && t < hi) {
                return Err(Error::config(format!("theta[{i}] = {t} deg lies outside ({lo}, {hi})")));
            }
            if self.theta_deg[..i].contains(&t) {
                return Err(Error::config(format!("theta[{i}] = {t} deg is duplicated")));
            }
        }
        Ok(())
    }

    /// Replaces the source amplitudes with unit-modulus values of uniformly
    /// random phase.
    pub fn randomize_source_phases<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let two_pi = 2.0 * core::f64::consts::PI;
        for s in self.source.iter_mut() {
            *s = Complex64::from_polar(1.0, rng.random::<f64>() * two_pi);
        }
    }
}

/// `a(θ)` for a uniform linear array of `len` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: CVector,
    pub theta_deg: f64,
    pub varphi_deg: f64,
    pub spacing: f64,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Entry `m` is `exp(j·2π·m·d·sin(θ+φ))`.
pub fn steering_vector(theta_deg: f64, varphi_deg: f64, len: usize, spacing: f64) -> SteeringVector {
    SteeringVector {
        entries: steering_entries(deg_to_rad(theta_deg + varphi_deg), len, spacing),
        theta_deg,
        varphi_deg,
        spacing,
    }
}

/// Steering entries for an already combined angle `θ+φ` in radians.
pub(crate) fn steering_entries(angle_rad: f64, len: usize, spacing: f64) -> CVector {
    let phase = 2.0 * core::f64::consts::PI * spacing * angle_rad.sin();
    CVector::from_fn(len, |m, _| Complex64::from_polar(1.0, phase * m as f64))
}

/// `A(θ)`: one steering column per target.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayManifold {
    pub matrix: CMatrix,
}

/// Manifold with `len` rows (`M` for the measurement model, `L` for MUSIC).
pub fn array_manifold(cfg: &SceneConfig, len: usize) -> ArrayManifold {
    let mut matrix = CMatrix::zeros(len, cfg.targets());
    for (n, &theta) in cfg.theta_deg.iter().enumerate() {
        let a = steering_entries(deg_to_rad(theta + cfg.varphi_deg), len, cfg.spacing);
        matrix.set_column(n, &a);
    }
    ArrayManifold { matrix }
}

/// `x_n = (γ/d_r)(α_n/d_{s,n})·s_n`.
pub fn target_amplitudes(cfg: &SceneConfig) -> CVector {
    let leg = cfg.gamma / cfg.ris_antenna_distance;
    CVector::from_fn(cfg.targets(), |n, _| {
        cfg.source[n] * (leg * cfg.alpha[n] / cfg.target_distance[n])
    })
}

/// The `K×M` RIS control matrix with entries `A_{k,m}·exp(jφ_{k,m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisControlMatrix {
    g: CMatrix,
}

impl RisControlMatrix {
    pub fn new(g: CMatrix) -> Self {
        Self { g }
    }

    /// Unit-amplitude matrix from a `K×M` phase array in radians.
    pub fn from_phases(phases: &nalgebra::DMatrix<f64>) -> Self {
        Self {
            g: phases.map(|p| Complex64::from_polar(1.0, p)),
        }
    }

    /// Unit-amplitude matrix with i.i.d. uniform phases.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, slots: usize, elements: usize) -> Self {
        let two_pi = 2.0 * core::f64::consts::PI;
        // Row-major draw order so a matrix is reproducible slot by slot.
        let mut g = CMatrix::zeros(slots, elements);
        for k in 0..slots {
            for m in 0..elements {
                g[(k, m)] = Complex64::from_polar(1.0, rng.random::<f64>() * two_pi);
            }
        }
        Self { g }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }

    pub fn into_matrix(self) -> CMatrix {
        self.g
    }

    /// `(K, M)`.
    pub fn shape(&self) -> (usize, usize) {
        self.g.shape()
    }

    pub fn slots(&self) -> usize {
        self.g.nrows()
    }

    pub fn elements(&self) -> usize {
        self.g.ncols()
    }

    pub fn measure(&self, z: &CVector) -> Result<CVector> {
        if z.len() != self.elements() {
            return Err(Error::Shape {
                context: "G·z",
                expected: (self.elements(), 1),
                found: (z.len(), 1),
            });
        }
        Ok(&self.g * z)
    }
}

/// Noiseless RIS-incident signal `z = A(θ)·x` and its measurement `y0 = G·z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanSignal {
    pub z: CVector,
    pub y0: CVector,
}

pub fn synthesize_clean(cfg: &SceneConfig, g: &RisControlMatrix) -> Result<CleanSignal> {
    cfg.validate()?;
    let expected = (cfg.slots, cfg.elements);
    if g.shape() != expected {
        return Err(Error::Shape {
            context: "RIS control matrix",
            expected,
            found: g.shape(),
        });
    }
    let z = incident_signal(cfg);
    let y0 = g.measure(&z)?;
    Ok(CleanSignal { z, y0 })
}

/// `z = A(θ)·x` without the RIS measurement.
pub fn incident_signal(cfg: &SceneConfig) -> CVector {
    array_manifold(cfg, cfg.elements).matrix * target_amplitudes(cfg)
}
