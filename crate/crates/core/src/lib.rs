//! Robust single-snapshot direction-of-arrival estimation for a receiver that
//! observes its targets only through a reconfigurable intelligent surface (RIS).
//!
//! The pipeline is:
//!
//! 1. [`scene`] synthesises `y = G·A(θ)·x` for a RIS with `M` elements
//!    probed over `K` time slots.
//! 2. [`noise`] adds Bernoulli–Gaussian impulsive noise calibrated to an SNR
//!    measured on the RIS-incident signal `z = A(θ)·x`.
//! 3. [`lawson`] recovers `z` from `y` by minimising a dual Lawson-norm
//!    objective with a Bregman ADMM.
//! 4. [`music`] estimates the DOAs from the recovered `z` with Hankel-matrix
//!    MUSIC.
//!
//! [`rosm`] selects the RIS control matrix by random search on received
//! power, [`crlb`] evaluates the Cramér–Rao bound and [`baselines`] holds
//! the reference estimators (OMP, ℓp-ADM) used in benchmarks.
//!
//! The crate is `no_std` and needs only `alloc`.
//!
//! ```
//! use lnmusic_core::scene::incident_signal;
//! use lnmusic_core::{DoaEstimator, LnMusic, RisControlMatrix, SceneConfig};
//! use rand::SeedableRng;
//!
//! let scene = SceneConfig::default();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
//! let g = RisControlMatrix::random(&mut rng, scene.slots, scene.elements);
//! let y = g.measure(&incident_signal(&scene))?;
//! let est = LnMusic::new(Default::default(), Default::default(), (&scene).into());
//! let doas = est.estimate(&y, &g)?;
//! assert!((doas[1] - 0.0).abs() <= 0.01);
//! # Ok::<(), lnmusic_core::Error>(())
//! ```

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod crlb;
mod error;
pub mod estimator;
pub mod lawson;
mod linalg;
pub mod metrics;
pub mod music;
pub mod noise;
pub mod rosm;
pub mod scene;

pub use error::{Error, Result};
pub use estimator::{DoaEstimator, Geometry, LnMusic, LpAdmMusic, OmpGrid};
pub use lawson::{EpsilonTable, LawsonAdmm, LawsonParams, SolverState};
pub use music::{HankelConfig, SpatialSpectrum};
pub use noise::{NoiseConfig, NoiseGenerator};
pub use rosm::{RosmConfig, RosmOutcome};
pub use scene::{RisControlMatrix, SceneConfig};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

/// Complex column vector.
pub type CVector = DVector<Complex64>;
/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) fn deg_to_rad(deg: f64) -> f64 {
    deg * (core::f64::consts::PI / 180.0)
}

pub(crate) fn rad_to_deg(rad: f64) -> f64 {
    rad * (180.0 / core::f64::consts::PI)
}
