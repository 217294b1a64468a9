//! Experiment plans, read from TOML.

use std::fmt;
use std::path::Path;

use lnmusic_core::baselines::LpAdmParams;
use lnmusic_core::{EpsilonTable, HankelConfig, LawsonParams, NoiseConfig, RosmConfig, SceneConfig};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Quantity varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    SnrDb,
    /// RIS element count `M`.
    Elements,
    /// Time-slot count `K`.
    Slots,
    /// RIS to receive-antenna distance, metres.
    RisAntennaDistance,
    /// Target to RIS distance, metres, applied to every target.
    TargetDistance,
    /// ADMM penalty `ε`; overrides the epsilon policy.
    Epsilon,
    /// ROSM candidate count `T`.
    Candidates,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SnrDb => "snr_db",
            Self::Elements => "elements",
            Self::Slots => "slots",
            Self::RisAntennaDistance => "ris_antenna_distance",
            Self::TargetDistance => "target_distance",
            Self::Epsilon => "epsilon",
            Self::Candidates => "candidates",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, Self::Elements | Self::Slots | Self::Candidates)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            variable: SweepVariable::SnrDb,
            values: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    LnMusic,
    LpAdm,
    Omp,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LnMusic => "ln-music",
            Self::LpAdm => "lp-adm",
            Self::Omp => "omp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub kind: MethodKind,
    /// Use the ROSM-selected control matrix instead of a random one.
    #[serde(default)]
    pub rosm: bool,
    /// Name in reports; defaults to the kind, with `+rosm` when enabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MethodSpec {
    pub fn new(kind: MethodKind, rosm: bool) -> Self {
        Self {
            kind,
            rosm,
            label: None,
        }
    }

    pub fn label(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None if self.rosm => format!("{}+rosm", self.kind.as_str()),
            None => self.kind.as_str().to_string(),
        }
    }
}

/// How the LN-MUSIC penalty `ε` is chosen per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsilonPolicy {
    Fixed {
        value: f64,
    },
    /// Interpolated from `(snr_db, ε)` knots at the trial SNR; the shipped
    /// scan table when `knots` is absent.
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        knots: Option<EpsilonTable>,
    },
}

impl Default for EpsilonPolicy {
    fn default() -> Self {
        Self::Table { knots: None }
    }
}

impl EpsilonPolicy {
    pub fn epsilon(&self, snr_db: f64) -> f64 {
        match self {
            Self::Fixed { value } => *value,
            Self::Table { knots: Some(t) } => t.lookup(snr_db),
            Self::Table { knots: None } => EpsilonTable::default().lookup(snr_db),
        }
    }
}

/// Grids for the parameter scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanGrid {
    pub epsilons: Vec<f64>,
    pub rhos: Vec<f64>,
    pub zetas: Vec<f64>,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            epsilons: vec![0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0],
            rhos: vec![0.01, 0.03, 0.1, 0.3, 1.0],
            zetas: vec![0.0, 1e-3, 1e-2, 1e-1, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub name: String,
    /// Monte Carlo trials per sweep value, `N_MC`.
    pub trials: usize,
    /// Trial `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Skip the noise entirely; the SNR still selects `ε`.
    pub noiseless: bool,
    /// Draw fresh uniform phases for the target amplitudes every trial.
    pub random_source_phases: bool,
    /// Evaluate the CRLB for every trial.
    pub crlb: bool,
    pub sweep: Sweep,
    pub methods: Vec<MethodSpec>,
    pub scene: SceneConfig,
    pub noise: NoiseConfig,
    pub solver: LawsonParams,
    pub epsilon: EpsilonPolicy,
    pub music: HankelConfig,
    pub rosm: RosmConfig,
    pub lp_adm: LpAdmParams,
    pub scan: ScanGrid,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            name: "snr-sweep".into(),
            trials: 100,
            base_seed: 0,
            workers: 0,
            noiseless: false,
            random_source_phases: true,
            crlb: true,
            sweep: Sweep::default(),
            methods: vec![
                MethodSpec::new(MethodKind::LnMusic, true),
                MethodSpec::new(MethodKind::LnMusic, false),
                MethodSpec::new(MethodKind::LpAdm, true),
                MethodSpec::new(MethodKind::Omp, true),
            ],
            scene: SceneConfig::default(),
            noise: NoiseConfig::default(),
            solver: LawsonParams::default(),
            epsilon: EpsilonPolicy::default(),
            music: HankelConfig::default(),
            rosm: RosmConfig::default(),
            lp_adm: LpAdmParams::default(),
            scan: ScanGrid::default(),
        }
    }
}

/// Fully resolved configuration for one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    pub scene: SceneConfig,
    pub noise: NoiseConfig,
    pub solver: LawsonParams,
    pub rosm: RosmConfig,
}

impl ExperimentPlan {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let plan: Self = toml::from_str(text).map_err(|e| BenchError::Plan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Plan(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            BenchError::Plan(msg) => BenchError::Plan(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plans always serialise")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let plan_err = |m: String| Err(BenchError::Plan(m));
        if self.trials == 0 {
            return plan_err("trials must be at least 1".into());
        }
        if self.sweep.values.is_empty() {
            return plan_err("sweep.values is empty".into());
        }
        if self.methods.is_empty() {
            return plan_err("no methods listed".into());
        }
        let mut labels: Vec<String> = self.methods.iter().map(MethodSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return plan_err("method labels must be unique".into());
        }
        if self.base_seed.checked_add(self.trials as u64).is_none() {
            return plan_err("base_seed + trials overflows".into());
        }
        for &v in &self.sweep.values {
            if !v.is_finite() {
                return plan_err(format!("sweep value {v} is not finite"));
            }
            if self.sweep.variable.is_count() && (v < 1.0 || v.fract() != 0.0) {
                return plan_err(format!("{} must be a positive integer, got {v}", self.sweep.variable));
            }
            let point = self.point(v);
            point
                .scene
                .validate()
                .map_err(|e| BenchError::Plan(format!("at {}={v}: {e}", self.sweep.variable)))?;
            point
                .noise
                .validate()
                .map_err(|e| BenchError::Plan(format!("noise: {e}")))?;
            point
                .solver
                .validate()
                .map_err(|e| BenchError::Plan(format!("solver at {}={v}: {e}", self.sweep.variable)))?;
            point
                .rosm
                .validate()
                .map_err(|e| BenchError::Plan(format!("rosm: {e}")))?;
            self.music
                .validate(point.scene.elements)
                .map_err(|e| BenchError::Plan(format!("music at {}={v}: {e}", self.sweep.variable)))?;
            if self.music.sources != point.scene.targets() {
                return plan_err(format!(
                    "music.sources = {} but the scene has {} targets",
                    self.music.sources,
                    point.scene.targets()
                ));
            }
        }
        self.lp_adm
            .validate()
            .map_err(|e| BenchError::Plan(format!("lp_adm: {e}")))?;
        if let EpsilonPolicy::Fixed { value } = self.epsilon {
            if value.is_nan() || value <= 0.0 {
                return plan_err("epsilon.value must be positive".into());
            }
        }
        Ok(())
    }

    /// Configuration at sweep value `value`.
    pub fn point(&self, value: f64) -> PointConfig {
        let mut scene = self.scene.clone();
        let mut noise = self.noise.clone();
        let mut solver = self.solver.clone();
        let mut rosm = self.rosm.clone();
        match self.sweep.variable {
            SweepVariable::SnrDb => noise.snr_db = value,
            SweepVariable::Elements => scene.elements = value as usize,
            SweepVariable::Slots => scene.slots = value as usize,
            SweepVariable::RisAntennaDistance => scene.ris_antenna_distance = value,
            SweepVariable::TargetDistance => scene.target_distance.iter_mut().for_each(|d| *d = value),
            SweepVariable::Epsilon => solver.epsilon = value,
            SweepVariable::Candidates => rosm.candidates = value as usize,
        }
        if self.sweep.variable != SweepVariable::Epsilon {
            solver.epsilon = self.epsilon.epsilon(noise.snr_db);
        }
        PointConfig {
            scene,
            noise,
            solver,
            rosm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_round_trips_through_toml() {
        let plan = ExperimentPlan::default();
        plan.validate().unwrap();
        let back = ExperimentPlan::from_toml(&plan.to_toml()).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn partial_plan_fills_defaults() {
        let plan = ExperimentPlan::from_toml(
            r#"
            trials = 5
            [sweep]
            variable = "elements"
            values = [16, 32]
            [[methods]]
            kind = "omp"
            "#,
        )
        .unwrap();
        assert_eq!(plan.trials, 5);
        assert_eq!(plan.point(16.0).scene.elements, 16);
        assert_eq!(plan.methods[0].label(), "omp");
    }

    #[test]
    fn bad_plans_are_rejected() {
        for text in [
            "trials = 0",
            "[sweep]\nvariable = \"snr_db\"\nvalues = []",
            "[sweep]\nvariable = \"elements\"\nvalues = [2.5]",
            "[sweep]\nvariable = \"elements\"\nvalues = [4]",
            "unknown_key = 1",
            "[epsilon]\nmode = \"fixed\"\nvalue = -1.0",
            "[[methods]]\nkind = \"omp\"\n[[methods]]\nkind = \"omp\"",
        ] {
            assert!(ExperimentPlan::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn epsilon_policy_applies_unless_swept() {
        let mut plan = ExperimentPlan {
            epsilon: EpsilonPolicy::Fixed { value: 0.7 },
            ..ExperimentPlan::default()
        };
        assert_eq!(plan.point(10.0).solver.epsilon, 0.7);
        plan.sweep = Sweep {
            variable: SweepVariable::Epsilon,
            values: vec![0.2],
        };
        assert_eq!(plan.point(0.2).solver.epsilon, 0.2);
    }
}
