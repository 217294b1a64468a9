//! Cramér–Rao lower bound on the DOAs.
//!
//! The unknowns are `θ` (radians) and the complex amplitudes `x`, the latter
//! parameterised as `[Re x; Im x]` so every Fisher block is real. The noise
//! covariance is taken as `Q = (κσ1² + σ2²)·I`, i.e. the Gaussian with the
//! same variance as the impulsive mixture. The result is therefore the
//! Gaussian-equivalent bound, not the exact bound of the mixture likelihood.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::inverse_spd;
use crate::noise::{calibrate_sigma2, NoiseConfig};
use crate::scene::{incident_signal, steering_entries, target_amplitudes, RisControlMatrix, SceneConfig};
use crate::{deg_to_rad, rad_to_deg, CMatrix, CVector, Error, Result};

/// `A(θ)` for radian angles `theta + varphi`.
fn manifold_rad(theta: &[f64], varphi: f64, len: usize, spacing: f64) -> CMatrix {
    let mut a = CMatrix::zeros(len, theta.len());
    for (n, t) in theta.iter().enumerate() {
        a.set_column(n, &steering_entries(t + varphi, len, spacing));
    }
    a
}

/// `B = ∂(A(θ)x)/∂θ`, column `n` being `x_n·∂a(θ_n)/∂θ_n`.
fn derivative_rad(theta: &[f64], x: &CVector, varphi: f64, len: usize, spacing: f64) -> CMatrix {
    let two_pi_d = 2.0 * core::f64::consts::PI * spacing;
    let mut b = CMatrix::zeros(len, theta.len());
    for (n, t) in theta.iter().enumerate() {
        let (s, c) = (t + varphi).sin_cos();
        for m in 0..len {
            let mf = m as f64;
            let phase = Complex64::from_polar(1.0, two_pi_d * mf * s);
            b[(m, n)] = x[n] * Complex64::new(0.0, two_pi_d * mf * c) * phase;
        }
    }
    b
}

/// `B` for the scene's targets over `len` elements.
pub fn manifold_derivative(scene: &SceneConfig, len: usize) -> CMatrix {
    let theta: Vec<f64> = scene.theta_deg.iter().map(|t| deg_to_rad(*t)).collect();
    derivative_rad(
        &theta,
        &target_amplitudes(scene),
        deg_to_rad(scene.varphi_deg),
        len,
        scene.spacing,
    )
}

/// Real Fisher information split into `θ` and `[Re x; Im x]` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherBlocks {
    /// `N×N`.
    pub f11: DMatrix<f64>,
    /// `N×2N`.
    pub f12: DMatrix<f64>,
    /// `2N×N`.
    pub f21: DMatrix<f64>,
    /// `2N×2N`.
    pub f22: DMatrix<f64>,
    pub noise_variance: f64,
}

impl FisherBlocks {
    pub fn full(&self) -> DMatrix<f64> {
        let n = self.f11.nrows();
        let mut f = DMatrix::zeros(3 * n, 3 * n);
        f.view_mut((0, 0), (n, n)).copy_from(&self.f11);
        f.view_mut((0, n), (n, 2 * n)).copy_from(&self.f12);
        f.view_mut((n, 0), (2 * n, n)).copy_from(&self.f21);
        f.view_mut((n, n), (2 * n, 2 * n)).copy_from(&self.f22);
        f
    }

    /// Every block multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            f11: &self.f11 * c,
            f12: &self.f12 * c,
            f21: &self.f21 * c,
            f22: &self.f22 * c,
            noise_variance: self.noise_variance / c,
        }
    }
}

/// Fisher information for `y = G·A(θ)·x + v`, `v ~ CN(0, variance·I)`.
///
/// With `J = [G·B, G·A, j·G·A]`, `F = (2/variance)·Re(Jᴴ·J)`; its `θ` block is
/// `2·Re(BᴴGᴴGB)/variance`.
pub fn fisher(scene: &SceneConfig, g: &RisControlMatrix, noise_variance: f64) -> Result<FisherBlocks> {
    scene.validate()?;
    if !(noise_variance > 0.0) || !noise_variance.is_finite() {
        return Err(Error::param(
            "noise_variance",
            "must be positive; the bound degenerates",
        ));
    }
    let expected = (scene.slots, scene.elements);
    if g.shape() != expected {
        return Err(Error::Shape {
            context: "RIS control matrix",
            expected,
            found: g.shape(),
        });
    }
    let n = scene.targets();
    let gm = g.matrix();
    let ga = gm * crate::scene::array_manifold(scene, scene.elements).matrix;
    let gb = gm * manifold_derivative(scene, scene.elements);
    let mut j = CMatrix::zeros(scene.slots, 3 * n);
    j.view_mut((0, 0), (scene.slots, n)).copy_from(&gb);
    j.view_mut((0, n), (scene.slots, n)).copy_from(&ga);
    j.view_mut((0, 2 * n), (scene.slots, n))
        .copy_from(&(&ga * Complex64::new(0.0, 1.0)));
    let f = (j.adjoint() * &j).map(|c| 2.0 * c.re / noise_variance);
    Ok(FisherBlocks {
        f11: f.view((0, 0), (n, n)).into_owned(),
        f12: f.view((0, n), (n, 2 * n)).into_owned(),
        f21: f.view((n, 0), (2 * n, n)).into_owned(),
        f22: f.view((n, n), (2 * n, 2 * n)).into_owned(),
        noise_variance,
    })
}

/// [`fisher`] with the mixture variance `κσ1² + σ2²` implied by `noise.snr_db`.
pub fn fisher_at_snr(scene: &SceneConfig, g: &RisControlMatrix, noise: &NoiseConfig) -> Result<FisherBlocks> {
    noise.validate()?;
    let sigma2 = calibrate_sigma2(&incident_signal(scene), noise.snr_db)?;
    fisher(scene, g, noise.total_variance(sigma2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbBound {
    /// Per-target variance bound in rad².
    pub variances: Vec<f64>,
    /// `sqrt(mean(variances))` in degrees, comparable with the RMSE metric.
    pub rmse_deg: f64,
}

impl CrlbBound {
    fn from_variances(variances: Vec<f64>) -> Self {
        let mean = variances.iter().sum::<f64>() / variances.len() as f64;
        Self {
            rmse_deg: rad_to_deg(mean.sqrt()),
            variances,
        }
    }
}

/// `diag([F11 − F12·F22⁻¹·F21]⁻¹)`.
pub fn crlb_theta(blocks: &FisherBlocks) -> Result<CrlbBound> {
    let f22_inv = inverse_spd(&blocks.f22).ok_or(Error::Degenerate("F22"))?;
    let schur = &blocks.f11 - &blocks.f12 * f22_inv * &blocks.f21;
    let inv = inverse_spd(&schur).ok_or(Error::Degenerate("Schur complement of F22"))?;
    let variances: Vec<f64> = inv.diagonal().iter().copied().collect();
    if variances.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Degenerate("Schur complement of F22"));
    }
    Ok(CrlbBound::from_variances(variances))
}

/// The `θ` diagonal of the full `F⁻¹`, without the block route.
pub fn crlb_theta_direct(blocks: &FisherBlocks) -> Result<CrlbBound> {
    let n = blocks.f11.nrows();
    let inv = inverse_spd(&blocks.full()).ok_or(Error::Degenerate("F"))?;
    Ok(CrlbBound::from_variances((0..n).map(|i| inv[(i, i)]).collect()))
}

/// Bound in degrees at each SNR for a fixed control matrix.
pub fn crlb_curve(
    scene: &SceneConfig,
    g: &RisControlMatrix,
    noise: &NoiseConfig,
    snrs_db: &[f64],
) -> Result<Vec<(f64, f64)>> {
    snrs_db
        .iter()
        .map(|&snr| {
            let cfg = NoiseConfig {
                snr_db: snr,
                ..noise.clone()
            };
            Ok((snr, crlb_theta(&fisher_at_snr(scene, g, &cfg)?)?.rmse_deg))
        })
        .collect()
}

/// Parameter point of the likelihood: radian DOAs and complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub theta_rad: Vec<f64>,
    pub x: CVector,
}

impl ModelPoint {
    pub fn of_scene(scene: &SceneConfig) -> Self {
        Self {
            theta_rad: scene.theta_deg.iter().map(|t| deg_to_rad(*t)).collect(),
            x: target_amplitudes(scene),
        }
    }

    fn mean(&self, scene: &SceneConfig, g: &CMatrix) -> CVector {
        let a = manifold_rad(&self.theta_rad, deg_to_rad(scene.varphi_deg), g.ncols(), scene.spacing);
        g * (a * &self.x)
    }
}

/// `−(y−μ)ᴴQ⁻¹(y−μ) − ln(π^K det Q)` with `Q = variance·I`.
pub fn log_likelihood(
    y: &CVector,
    g: &RisControlMatrix,
    scene: &SceneConfig,
    point: &ModelPoint,
    noise_variance: f64,
) -> f64 {
    let r = y - point.mean(scene, g.matrix());
    let k = y.len() as f64;
    -r.norm_squared() / noise_variance - k * (core::f64::consts::PI * noise_variance).ln()
}

/// Analytic score of [`log_likelihood`].
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    /// `∂/∂θ = 2·Re[(y−μ)ᴴQ⁻¹·G·B]`.
    pub theta: Vec<f64>,
    /// Wirtinger `∂/∂x = (y−μ)ᴴQ⁻¹·G·A`; `∂/∂Re x = 2·Re`, `∂/∂Im x = −2·Im`.
    pub x: CVector,
}

pub fn score(y: &CVector, g: &RisControlMatrix, scene: &SceneConfig, point: &ModelPoint, noise_variance: f64) -> Score {
    let gm = g.matrix();
    let varphi = deg_to_rad(scene.varphi_deg);
    let m = gm.ncols();
    let r = (y - point.mean(scene, gm)) / Complex64::from(noise_variance);
    let rh = r.adjoint();
    let gb = gm * derivative_rad(&point.theta_rad, &point.x, varphi, m, scene.spacing);
    let ga = gm * manifold_rad(&point.theta_rad, varphi, m, scene.spacing);
    Score {
        theta: (&rh * gb).iter().map(|c| 2.0 * c.re).collect(),
        x: (&rh * ga).transpose(),
    }
}
