//! Single-snapshot MUSIC on a Hankel matrix.
//!
//! A single length-`M` snapshot `z = A(θ)·x` is rearranged into the `L×(M−L+1)`
//! Hankel matrix `H[i, j] = z[i+j]`. Its column space is spanned by the
//! length-`L` steering vectors of the `N` sources, so the left singular
//! vectors of the `L−N` smallest singular values span a noise subspace `U2`
//! orthogonal to every `a(θ_n)`. The pseudo-spectrum
//! `Υ(θ) = ‖a(θ)‖² / ‖a(θ)ᴴ·U2‖²` peaks at the source directions.

use alloc::vec::Vec;

use crate::scene::steering_entries;
use crate::{deg_to_rad, CMatrix, CVector, Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct HankelConfig {
    /// Hankel row count `L`; `None` picks [`default_rows`] for the snapshot.
    pub rows: Option<usize>,
    pub grid_start: f64,
    pub grid_stop: f64,
    pub grid_step: f64,
    /// Number of sources `N`.
    pub sources: usize,
    /// Value reported where `‖a(θ)ᴴU2‖²` is exactly zero.
    pub spectral_ceiling: f64,
}

impl Default for HankelConfig {
    fn default() -> Self {
        Self {
            rows: None,
            grid_start: -40.0,
            grid_stop: 40.0,
            grid_step: 0.01,
            sources: 3,
            spectral_ceiling: 1e300,
        }
    }
}

/// `L = round(M/3)`, clamped into `N < L ≤ M−N`.
pub fn default_rows(elements: usize, sources: usize) -> usize {
    let l = (elements + 1) / 3;
    l.max(sources + 1).min(elements.saturating_sub(sources))
}

impl HankelConfig {
    /// Row count for a snapshot of `elements` entries.
    pub fn rows_for(&self, elements: usize) -> usize {
        self.rows.unwrap_or_else(|| default_rows(elements, self.sources))
    }

    /// Validates against a snapshot length; returns the row count to use.
    pub fn validate(&self, elements: usize) -> Result<usize> {
        if self.sources == 0 {
            return Err(Error::config("at least one source is required"));
        }
        if !(self.grid_step > 0.0) || !self.grid_step.is_finite() {
            return Err(Error::config("grid_step must be positive"));
        }
        if !(self.grid_start <= self.grid_stop) {
            return Err(Error::config("grid_start must not exceed grid_stop"));
        }
        let l = self.rows_for(elements);
        check_rows(elements, l, self.sources)?;
        if l <= self.sources {
            return Err(Error::config(alloc::format!(
                "L = {l} leaves no noise subspace for {} sources",
                self.sources
            )));
        }
        Ok(l)
    }

    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.grid_stop - self.grid_start) / self.grid_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.grid_start + i as f64 * self.grid_step)
            .collect()
    }
}

fn check_rows(elements: usize, rows: usize, sources: usize) -> Result<()> {
    // N ≤ L < M − N + 1
    if rows < sources || rows + sources > elements {
        return Err(Error::config(alloc::format!(
            "Hankel rows L = {rows} must satisfy {sources} <= L < {}",
            (elements + 1).saturating_sub(sources)
        )));
    }
    Ok(())
}

/// `L×(M−L+1)` Hankel matrix with `H[i, j] = z[i+j]`.
pub fn hankel(z: &CVector, rows: usize, sources: usize) -> Result<CMatrix> {
    let m = z.len();
    check_rows(m, rows, sources)?;
    Ok(CMatrix::from_fn(rows, m - rows + 1, |i, j| z[i + j]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSubspace {
    /// `L×(L−N)` orthonormal basis `U2`.
    pub basis: CMatrix,
    /// `L×N` signal basis `U1`.
    pub signal: CMatrix,
    /// All `L` singular values, descending (zeros where `L > M−L+1`).
    pub singular_values: Vec<f64>,
}

/// Splits the left singular vectors of `h` into signal and noise subspaces.
pub fn noise_subspace(h: &CMatrix, sources: usize) -> Result<NoiseSubspace> {
    let l = h.nrows();
    if sources >= l {
        return Err(Error::config(alloc::format!(
            "need L > N for a noise subspace (L = {l}, N = {sources})"
        )));
    }
    // Zero-pad to at least square so the SVD returns all L left vectors.
    let cols = h.ncols().max(l);
    let mut padded = CMatrix::zeros(l, cols);
    padded.view_mut((0, 0), (l, h.ncols())).copy_from(h);
    let svd = padded
        .try_svd(true, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hankel SVD did not converge".into()))?;
    let u = svd
        .u
        .ok_or_else(|| Error::Numerical("Hankel SVD returned no left vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let pick = |idx: &[usize]| {
        let mut out = CMatrix::zeros(l, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            out.set_column(c, &u.column(i));
        }
        out
    };
    Ok(NoiseSubspace {
        signal: pick(&order[..sources]),
        basis: pick(&order[sources..l]),
        singular_values: order[..l].iter().map(|&i| svd.singular_values[i]).collect(),
    })
}

/// Pseudo-spectrum over an angle grid plus detected peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSpectrum {
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    /// Up to `sources` strongest local maxima, ascending in angle.
    pub peaks: Vec<f64>,
    pub sources: usize,
    /// Set when some grid value hit the spectral ceiling.
    pub clamped: bool,
}

impl SpatialSpectrum {
    /// The detected DOAs, or an estimation failure when fewer than `sources`
    /// peaks were found.
    pub fn doas(&self) -> Result<&[f64]> {
        if self.peaks.len() < self.sources {
            Err(Error::EstimationFailure {
                found: self.peaks.len(),
                expected: self.sources,
            })
        } else {
            Ok(&self.peaks)
        }
    }
}

/// `Υ(θ) = ‖a(θ)‖² / ‖a(θ)ᴴU2‖²` over the configured grid.
pub fn spectrum(noise: &CMatrix, cfg: &HankelConfig, varphi_deg: f64, spacing: f64) -> Result<SpatialSpectrum> {
    let angles = cfg.grid();
    if angles.is_empty() {
        return Err(Error::config("empty angle grid"));
    }
    let l = noise.nrows();
    let u2h = noise.adjoint();
    let mut clamped = false;
    let values: Vec<f64> = angles
        .iter()
        .map(|&theta| {
            let a = steering_entries(deg_to_rad(theta + varphi_deg), l, spacing);
            let num = a.norm_squared();
            let den = (&u2h * &a).norm_squared();
            let v = num / den;
            if den == 0.0 || !v.is_finite() || v > cfg.spectral_ceiling {
                clamped = true;
                cfg.spectral_ceiling
            } else {
                v
            }
        })
        .collect();
    let peaks = strongest_maxima(&values, cfg.sources)
        .into_iter()
        .map(|i| angles[i])
        .collect();
    Ok(SpatialSpectrum {
        angles,
        values,
        peaks,
        sources: cfg.sources,
        clamped,
    })
}

/// Indices of interior local maxima. A plateau counts once, at its leftmost
/// index, when both of its outer neighbours are strictly lower.
fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = values.len();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Up to `count` maxima by height; equal heights prefer the lower index.
/// Returned in ascending index order.
fn strongest_maxima(values: &[f64], count: usize) -> Vec<usize> {
    let mut idx = local_maxima(values);
    idx.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

/// The `count` strongest local maxima of `values`, as angles sorted
/// ascending.
pub fn detect_peaks(angles: &[f64], values: &[f64], count: usize) -> Result<Vec<f64>> {
    if angles.len() != values.len() {
        return Err(Error::Shape {
            context: "spectrum angles/values",
            expected: (angles.len(), 1),
            found: (values.len(), 1),
        });
    }
    let idx = strongest_maxima(values, count);
    if idx.len() < count {
        return Err(Error::EstimationFailure {
            found: idx.len(),
            expected: count,
        });
    }
    Ok(idx.into_iter().map(|i| angles[i]).collect())
}

/// Hankel construction, subspace split and spectrum in one call.
pub fn hankel_music(z: &CVector, cfg: &HankelConfig, varphi_deg: f64, spacing: f64) -> Result<SpatialSpectrum> {
    let rows = cfg.validate(z.len())?;
    let h = hankel(z, rows, cfg.sources)?;
    let sub = noise_subspace(&h, cfg.sources)?;
    spectrum(&sub.basis, cfg, varphi_deg, spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{incident_signal, steering_vector, SceneConfig};
    use alloc::vec;
    use num_complex::Complex64;

    fn unit(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hankel_layout() {
        let z = CVector::from_iterator(5, (1..=5).map(|v| unit(v as f64)));
        let h = hankel(&z, 2, 1).unwrap();
        assert_eq!(h.shape(), (2, 4));
        for i in 0..2 {
            for j in 0..4 {
                assert_eq!(h[(i, j)], unit((i + j + 1) as f64));
            }
        }
        assert!(hankel(&z, 5, 1).is_err());
        assert!(hankel(&z, 1, 2).is_err());
    }

    #[test]
    fn constant_and_single_tone_hankels_are_rank_one() {
        let z = CVector::from_element(10, Complex64::new(2.0, -1.0));
        let sub = noise_subspace(&hankel(&z, 4, 1).unwrap(), 1).unwrap();
        assert!(sub.singular_values[1] / sub.singular_values[0] < 1e-12);

        let a = steering_vector(13.0, 10.0, 32, 0.5).entries;
        let sub = noise_subspace(&hankel(&a, 8, 1).unwrap(), 1).unwrap();
        assert!(sub.singular_values[1] / sub.singular_values[0] < 1e-10);
    }

    #[test]
    fn noise_subspace_is_orthogonal_to_sources() {
        let cfg = SceneConfig::default();
        let z = incident_signal(&cfg);
        let sub = noise_subspace(&hankel(&z, 8, 3).unwrap(), 3).unwrap();
        assert_eq!(sub.basis.shape(), (8, 5));
        for &theta in &cfg.theta_deg {
            let a = steering_vector(theta, cfg.varphi_deg, 8, cfg.spacing).entries;
            assert!((sub.basis.adjoint() * a).norm() < 1e-8);
        }
        let gram = sub.basis.adjoint() * &sub.basis;
        assert!((gram - CMatrix::identity(5, 5)).norm() < 1e-12);
        assert!((sub.signal.adjoint() * &sub.basis).norm() < 1e-12);
        assert!(sub.singular_values[2] / sub.singular_values[3] > 1e6);
    }

    #[test]
    fn single_noise_column_when_l_is_n_plus_one() {
        let cfg = SceneConfig::default();
        let z = incident_signal(&cfg);
        let sub = noise_subspace(&hankel(&z, 4, 3).unwrap(), 3).unwrap();
        assert_eq!(sub.basis.shape(), (4, 1));
        assert!((sub.basis.column(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tall_hankel_still_yields_full_noise_basis() {
        // L = 20 > M − L + 1 = 13 for M = 32.
        let cfg = SceneConfig::default();
        let z = incident_signal(&cfg);
        let sub = noise_subspace(&hankel(&z, 20, 3).unwrap(), 3).unwrap();
        assert_eq!(sub.basis.shape(), (20, 17));
        let gram = sub.basis.adjoint() * &sub.basis;
        assert!((gram - CMatrix::identity(17, 17)).norm() < 1e-10);
    }

    #[test]
    fn projector_complement_peaks_at_the_excluded_direction() {
        let l = 8;
        let a0 = steering_vector(12.0, 10.0, l, 0.5).entries;
        // Orthonormal complement of span(a0) from the Hankel-free SVD route.
        let outer = &a0 * a0.adjoint();
        let sub = noise_subspace(&outer, 1).unwrap();
        let cfg = HankelConfig {
            sources: 1,
            grid_step: 0.05,
            ..HankelConfig::default()
        };
        let spec = spectrum(&sub.basis, &cfg, 10.0, 0.5).unwrap();
        let (imax, _) = spec
            .values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert!((spec.angles[imax] - 12.0).abs() < 1e-9);
        assert_eq!(spec.peaks.len(), 1);
        assert!((spec.peaks[0] - 12.0).abs() < 1e-9);
    }

    #[test]
    fn noiseless_scene_resolves_all_targets() {
        let cfg = SceneConfig::default();
        let z = incident_signal(&cfg);
        let music = HankelConfig {
            rows: Some(8),
            ..HankelConfig::default()
        };
        let spec = hankel_music(&z, &music, cfg.varphi_deg, cfg.spacing).unwrap();
        let doas = spec.doas().unwrap();
        for (est, truth) in doas.iter().zip(&cfg.theta_deg) {
            assert!((est - truth).abs() <= music.grid_step + 1e-9, "{est} vs {truth}");
        }
        assert!(spec.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn peak_detection_rules() {
        let angles: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let monotone = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        assert_eq!(
            detect_peaks(&angles, &monotone, 1),
            Err(Error::EstimationFailure { found: 0, expected: 1 })
        );
        let spike = [0.0, 0.0, 0.0, 9.0, 0.0, 0.0, 0.0];
        assert_eq!(detect_peaks(&angles, &spike, 1).unwrap(), vec![3.0]);
        let twins = [0.0, 5.0, 0.0, 0.0, 0.0, 5.0, 0.0];
        assert_eq!(detect_peaks(&angles, &twins, 1).unwrap(), vec![1.0]);
        assert_eq!(detect_peaks(&angles, &twins, 2).unwrap(), vec![1.0, 5.0]);
        let plateau = [0.0, 3.0, 3.0, 3.0, 1.0, 2.0, 0.0];
        assert_eq!(detect_peaks(&angles, &plateau, 2).unwrap(), vec![1.0, 5.0]);
        // A rising shoulder that never falls is not a peak.
        let shoulder = [0.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0];
        assert!(detect_peaks(&angles, &shoulder, 1).is_err());
    }

    #[test]
    fn steering_norm_is_constant_over_grid() {
        for theta in [-40.0, -3.3, 0.0, 17.0, 40.0] {
            let a = steering_vector(theta, 10.0, 12, 0.5).entries;
            assert!((a.norm_squared() - 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_null_is_clamped_and_flagged() {
        let l = 6;
        let a0 = steering_vector(0.0, 0.0, l, 0.5).entries;
        let sub = noise_subspace(&(&a0 * a0.adjoint()), 1).unwrap();
        let cfg = HankelConfig {
            sources: 1,
            grid_start: -1.0,
            grid_stop: 1.0,
            grid_step: 0.5,
            spectral_ceiling: 1e9,
            ..HankelConfig::default()
        };
        let spec = spectrum(&sub.basis, &cfg, 0.0, 0.5).unwrap();
        assert!(spec.clamped);
        assert!(spec.values.iter().all(|v| *v <= 1e9));
        assert_eq!(spec.peaks, vec![0.0]);
    }

    #[test]
    fn default_rows_respect_identifiability() {
        for m in [8, 16, 24, 32, 40] {
            let l = default_rows(m, 3);
            assert!(l > 3 && l + 3 <= m, "M = {m}: L = {l}");
        }
        assert_eq!(default_rows(32, 3), 11);
    }
}
