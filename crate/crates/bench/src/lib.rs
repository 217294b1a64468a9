//! Monte Carlo benchmark harness for `lnmusic-core`.
//!
//! An [`ExperimentPlan`](plan::ExperimentPlan) (TOML) fixes the scene, noise,
//! solver and method list plus one swept variable. [`run_sweep`] executes
//! every trial on a rayon pool and returns an
//! [`ExperimentReport`](report::ExperimentReport) whose CSV output depends only
//! on the plan, never on the worker count.

use std::path::{Path, PathBuf};

pub mod io;
pub mod plan;
pub mod report;
pub mod runner;
pub mod scan;

pub use plan::{ExperimentPlan, MethodKind, MethodSpec, Sweep, SweepVariable};
pub use report::{Aggregate, ExperimentReport, TrialRow};
pub use runner::run_sweep;

use lnmusic_core::lawson::Solution;
use lnmusic_core::{LnMusic, RisControlMatrix, SpatialSpectrum};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("plan error: {0}")]
    Plan(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] lnmusic_core::Error),
}

impl BenchError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One LN-MUSIC run, kept whole for inspection.
#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub g: RisControlMatrix,
    pub solution: Solution,
    pub spectrum: SpatialSpectrum,
    pub truth: Vec<f64>,
}

/// LN-MUSIC on trial `seed` at the plan's first sweep value. `g` replaces the
/// trial's own control matrix when given; otherwise ROSM picks it if `rosm`.
pub fn spectrum_run(
    plan: &ExperimentPlan,
    seed: u64,
    rosm: bool,
    g: Option<RisControlMatrix>,
) -> Result<SpectrumRun, BenchError> {
    plan.validate()?;
    let point = plan.point(plan.sweep.values[0]);
    let data = runner::draw_trial(plan, &point, seed, rosm && g.is_none())?;
    let g = match g {
        Some(g) => {
            if g.shape() != data.random_g.shape() {
                return Err(BenchError::Format(format!(
                    "control matrix is {:?}, the scene needs {:?}",
                    g.shape(),
                    data.random_g.shape()
                )));
            }
            g
        }
        None => data.control(rosm).clone(),
    };
    let y = g.measure(&data.z)? + &data.noise;
    let est = LnMusic::new(
        data.point.solver.clone(),
        plan.music.clone(),
        (&data.point.scene).into(),
    );
    let solution = est.recover(&y, &g)?;
    let spectrum = lnmusic_core::music::hankel_music(
        &solution.z,
        &plan.music,
        data.point.scene.varphi_deg,
        data.point.scene.spacing,
    )?;
    Ok(SpectrumRun {
        g,
        solution,
        spectrum,
        truth: data.truth,
    })
}
