//! Monte Carlo execution of a plan.

use lnmusic_core::crlb::{crlb_theta, fisher};
use lnmusic_core::metrics::{is_failure, squared_error};
use lnmusic_core::noise::calibrate_sigma2;
use lnmusic_core::rosm::{optimize_for_signal, srp, ProbeMode};
use lnmusic_core::scene::incident_signal;
use lnmusic_core::{CVector, DoaEstimator, Geometry, LnMusic, LpAdmMusic, NoiseGenerator, OmpGrid, RisControlMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::plan::{ExperimentPlan, MethodKind, PointConfig};
use crate::report::{ExperimentReport, TrialRow};
use crate::BenchError;

// Stream layout under the trial seed.
const SCENE_STREAM: u64 = 0;
const CONTROL_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
/// XORed into the trial seed to key the ROSM candidates apart from the
/// streams above.
const ROSM_KEY: u64 = 0x524f_534d_0000_0000;

/// Everything one trial draws before any estimator runs.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub point: PointConfig,
    pub seed: u64,
    pub truth: Vec<f64>,
    /// RIS-incident signal `z`.
    pub z: CVector,
    /// Background variance `σ2²`, zero when noiseless.
    pub sigma2: f64,
    pub noise: CVector,
    pub random_g: RisControlMatrix,
    /// ROSM choice; `None` when no method asked for it.
    pub rosm_g: Option<RisControlMatrix>,
}

impl TrialData {
    pub fn control(&self, rosm: bool) -> &RisControlMatrix {
        match (&self.rosm_g, rosm) {
            (Some(g), true) => g,
            _ => &self.random_g,
        }
    }

    /// `y = G·z + v` through the random or the ROSM control matrix.
    pub fn measurement(&self, rosm: bool) -> lnmusic_core::Result<CVector> {
        Ok(self.control(rosm).measure(&self.z)? + &self.noise)
    }
}

/// Draws the scene, control matrices and noise of trial `seed` at `point`.
pub fn draw_trial(
    plan: &ExperimentPlan,
    point: &PointConfig,
    seed: u64,
    need_rosm: bool,
) -> lnmusic_core::Result<TrialData> {
    let mut point = point.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SCENE_STREAM);
    if plan.random_source_phases {
        point.scene.randomize_source_phases(&mut rng);
    }
    let scene = &point.scene;
    let z = incident_signal(scene);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CONTROL_STREAM);
    let random_g = RisControlMatrix::random(&mut rng, scene.slots, scene.elements);

    let noise_cfg = lnmusic_core::NoiseConfig {
        seed,
        ..point.noise.clone()
    };
    let (sigma2, noise) = if plan.noiseless {
        (0.0, CVector::zeros(scene.slots))
    } else {
        let s2 = calibrate_sigma2(&z, noise_cfg.snr_db)?;
        let v = NoiseGenerator::with_stream(&noise_cfg, NOISE_STREAM)?.sample(scene.slots, s2);
        (s2, v)
    };

    let rosm_g = if need_rosm {
        let mut cfg = point.rosm.clone();
        cfg.seed ^= seed ^ ROSM_KEY;
        if plan.noiseless {
            cfg.probe = ProbeMode::Noiseless;
        }
        Some(optimize_for_signal(&z, scene.slots, &cfg, &noise_cfg)?.g)
    } else {
        None
    };

    Ok(TrialData {
        truth: scene.theta_deg.clone(),
        point,
        seed,
        z,
        sigma2,
        noise,
        random_g,
        rosm_g,
    })
}

/// Estimator for `kind` at a resolved point.
pub fn estimator(plan: &ExperimentPlan, point: &PointConfig, kind: MethodKind) -> Box<dyn DoaEstimator + Send + Sync> {
    let geo = Geometry::from(&point.scene);
    let music = plan.music.clone();
    match kind {
        MethodKind::LnMusic => Box::new(LnMusic::new(point.solver.clone(), music, geo)),
        MethodKind::LpAdm => Box::new(LpAdmMusic::new(plan.lp_adm.clone(), music, geo)),
        MethodKind::Omp => Box::new(OmpGrid::new(music, geo)),
    }
}

fn crlb_deg(data: &TrialData, rosm: bool) -> Option<f64> {
    if data.sigma2 <= 0.0 {
        return None;
    }
    let var = data.point.noise.total_variance(data.sigma2);
    fisher(&data.point.scene, data.control(rosm), var)
        .and_then(|f| crlb_theta(&f))
        .ok()
        .map(|b| b.rmse_deg)
}

fn run_trial(plan: &ExperimentPlan, value: f64, point: &PointConfig, trial: usize) -> Vec<TrialRow> {
    let seed = plan.base_seed + trial as u64;
    let need_rosm = plan.methods.iter().any(|m| m.rosm);
    let data = draw_trial(plan, point, seed, need_rosm);
    let mut crlb_cache: [Option<Option<f64>>; 2] = [None, None];
    plan.methods
        .iter()
        .map(|m| {
            let mut row = TrialRow {
                method: m.label(),
                sweep_value: value,
                trial,
                seed,
                truth: point.scene.theta_deg.clone(),
                estimate: None,
                sq_error: None,
                success: false,
                srp: None,
                crlb_deg: None,
                error: None,
            };
            let data = match &data {
                Ok(d) => d,
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            };
            if plan.crlb {
                let slot = &mut crlb_cache[m.rosm as usize];
                row.crlb_deg = *slot.get_or_insert_with(|| crlb_deg(data, m.rosm));
            }
            let result = data.measurement(m.rosm).and_then(|y| {
                row.srp = Some(srp(&y));
                estimator(plan, &data.point, m.kind).estimate(&y, data.control(m.rosm))
            });
            match result {
                Ok(est) => {
                    row.success = !is_failure(Some(&est), &data.truth);
                    row.sq_error = squared_error(&est, &data.truth).ok();
                    row.estimate = Some(est);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

/// Runs `f` on a pool of `workers` threads (0 = all cores).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Plan(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Every trial of every sweep value; rows are ordered by sweep value, then
/// trial, then method, whatever the worker count.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<ExperimentReport, BenchError> {
    plan.validate()?;
    let points: Vec<(f64, PointConfig)> = plan.sweep.values.iter().map(|&v| (v, plan.point(v))).collect();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..plan.trials).map(move |t| (p, t)))
        .collect();
    let rows = with_workers(plan.workers, || {
        jobs.par_iter()
            .map(|&(p, t)| run_trial(plan, points[p].0, &points[p].1, t))
            .collect::<Vec<_>>()
    })?;
    Ok(ExperimentReport::new(
        plan.clone(),
        rows.into_iter().flatten().collect(),
    ))
}
