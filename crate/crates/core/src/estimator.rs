//! A common interface over the DOA estimators.

use alloc::vec::Vec;

use crate::baselines::{lp_adm, omp, GridDictionary, LpAdmParams};
use crate::lawson::{LawsonAdmm, LawsonParams, Solution};
use crate::music::{hankel_music, HankelConfig, SpatialSpectrum};
use crate::scene::{RisControlMatrix, SceneConfig};
use crate::{CVector, Result};

/// Maps a measurement `y` taken through `G` to `N` DOAs in degrees,
/// ascending.
pub trait DoaEstimator {
    fn name(&self) -> &str;

    fn estimate(&self, y: &CVector, g: &RisControlMatrix) -> Result<Vec<f64>>;
}

/// Array geometry the estimators need to build steering vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub varphi_deg: f64,
    pub spacing: f64,
}

impl From<&SceneConfig> for Geometry {
    fn from(s: &SceneConfig) -> Self {
        Self {
            varphi_deg: s.varphi_deg,
            spacing: s.spacing,
        }
    }
}

/// Dual Lawson-norm recovery followed by Hankel MUSIC.
#[derive(Debug, Clone)]
pub struct LnMusic {
    pub solver: LawsonParams,
    pub music: HankelConfig,
    pub geometry: Geometry,
}

impl LnMusic {
    pub fn new(solver: LawsonParams, music: HankelConfig, geometry: Geometry) -> Self {
        Self {
            solver,
            music,
            geometry,
        }
    }

    pub fn recover(&self, y: &CVector, g: &RisControlMatrix) -> Result<Solution> {
        LawsonAdmm::new(g, self.solver.clone())?.solve(y, None)
    }

    pub fn spectrum(&self, y: &CVector, g: &RisControlMatrix) -> Result<SpatialSpectrum> {
        let z = self.recover(y, g)?.z;
        hankel_music(&z, &self.music, self.geometry.varphi_deg, self.geometry.spacing)
    }
}

impl DoaEstimator for LnMusic {
    fn name(&self) -> &str {
        "ln-music"
    }

    fn estimate(&self, y: &CVector, g: &RisControlMatrix) -> Result<Vec<f64>> {
        Ok(self.spectrum(y, g)?.doas()?.to_vec())
    }
}

/// Lp-ADM recovery followed by Hankel MUSIC.
#[derive(Debug, Clone)]
pub struct LpAdmMusic {
    pub solver: LpAdmParams,
    pub music: HankelConfig,
    pub geometry: Geometry,
}

impl LpAdmMusic {
    pub fn new(solver: LpAdmParams, music: HankelConfig, geometry: Geometry) -> Self {
        Self {
            solver,
            music,
            geometry,
        }
    }

    pub fn spectrum(&self, y: &CVector, g: &RisControlMatrix) -> Result<SpatialSpectrum> {
        let z = lp_adm(y, g, &self.solver)?.z;
        hankel_music(&z, &self.music, self.geometry.varphi_deg, self.geometry.spacing)
    }
}

impl DoaEstimator for LpAdmMusic {
    fn name(&self) -> &str {
        "lp-adm"
    }

    fn estimate(&self, y: &CVector, g: &RisControlMatrix) -> Result<Vec<f64>> {
        Ok(self.spectrum(y, g)?.doas()?.to_vec())
    }
}

/// OMP over the MUSIC angle grid; reads the DOAs off the selected atoms.
#[derive(Debug, Clone)]
pub struct OmpGrid {
    pub grid: HankelConfig,
    pub geometry: Geometry,
}

impl OmpGrid {
    pub fn new(grid: HankelConfig, geometry: Geometry) -> Self {
        Self { grid, geometry }
    }
}

impl DoaEstimator for OmpGrid {
    fn name(&self) -> &str {
        "omp"
    }

    fn estimate(&self, y: &CVector, g: &RisControlMatrix) -> Result<Vec<f64>> {
        let dict = GridDictionary::new(g, self.grid.grid(), self.geometry.varphi_deg, self.geometry.spacing)?;
        Ok(omp(y, &dict, self.grid.sources)?.angles)
    }
}
