//! Parameter scans for the LN-MUSIC solver.

use lnmusic_core::metrics::FAILURE_THRESHOLD_DEG;
use lnmusic_core::EpsilonTable;

use crate::plan::{ExperimentPlan, MethodKind, MethodSpec, Sweep, SweepVariable};
use crate::report::{into_string, num, opt, ExperimentReport};
use crate::runner::run_sweep;
use crate::BenchError;

/// RMSE over every trial of `method` at `value`, a trial without `N`
/// angles being charged the failure threshold on every target.
pub fn scan_score(report: &ExperimentReport, method: &str, value: f64) -> f64 {
    let rows: Vec<_> = report
        .rows
        .iter()
        .filter(|r| r.method == method && r.sweep_value == value)
        .collect();
    let n = rows[0].truth.len() as f64;
    let penalty = n * FAILURE_THRESHOLD_DEG * FAILURE_THRESHOLD_DEG;
    let total: f64 = rows.iter().map(|r| r.sq_error.unwrap_or(penalty)).sum();
    (total / (n * rows.len() as f64)).sqrt()
}

fn scan_method(plan: &ExperimentPlan) -> MethodSpec {
    let rosm = plan.methods.iter().any(|m| m.kind == MethodKind::LnMusic && m.rosm);
    MethodSpec::new(MethodKind::LnMusic, rosm)
}

/// Plan SNRs: the sweep values when sweeping SNR, else the plan's SNR.
fn snr_grid(plan: &ExperimentPlan) -> Vec<f64> {
    if plan.sweep.variable == SweepVariable::SnrDb {
        plan.sweep.values.clone()
    } else {
        vec![plan.noise.snr_db]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCell {
    pub snr_db: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub zeta: f64,
    pub score: f64,
    pub rmse: Option<f64>,
    pub recovery_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonScan {
    pub cells: Vec<ScanCell>,
    /// Best `ε` per SNR; ties go to the smallest `ε`.
    pub best: Vec<(f64, f64)>,
}

impl EpsilonScan {
    pub fn table(&self) -> Result<EpsilonTable, BenchError> {
        EpsilonTable::new(self.best.clone()).map_err(BenchError::Core)
    }

    pub fn cells_csv(&self) -> String {
        cells_csv(&self.cells)
    }

    pub fn best_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["snr_db", "epsilon"]).expect("in-memory write");
        for (s, e) in &self.best {
            w.write_record([num(*s), num(*e)]).expect("in-memory write");
        }
        into_string(w)
    }
}

fn cells_csv(cells: &[ScanCell]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "snr_db",
        "epsilon",
        "rho",
        "zeta",
        "score_deg",
        "rmse_deg",
        "recovery_rate",
    ])
    .expect("in-memory write");
    for c in cells {
        w.write_record([
            num(c.snr_db),
            num(c.epsilon),
            num(c.rho),
            num(c.zeta),
            num(c.score),
            opt(c.rmse),
            num(c.recovery_rate),
        ])
        .expect("in-memory write");
    }
    into_string(w)
}

/// For every SNR, the `ε` of `epsilons` with the lowest [`scan_score`].
pub fn epsilon_scan(plan: &ExperimentPlan, epsilons: &[f64], snrs: &[f64]) -> Result<EpsilonScan, BenchError> {
    if epsilons.is_empty() || snrs.is_empty() {
        return Err(BenchError::Plan("epsilon scan needs non-empty ε and SNR grids".into()));
    }
    let mut grid = epsilons.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let method = scan_method(plan);
    let label = method.label();
    let mut cells = Vec::new();
    let mut best = Vec::new();
    for &snr in snrs {
        let mut p = plan.clone();
        p.noise.snr_db = snr;
        p.methods = vec![method.clone()];
        p.crlb = false;
        p.sweep = Sweep {
            variable: SweepVariable::Epsilon,
            values: grid.clone(),
        };
        let report = run_sweep(&p)?;
        let mut winner: Option<(f64, f64)> = None;
        for &eps in &grid {
            let agg = report.aggregate(&label, eps).expect("every sweep value is aggregated");
            let score = scan_score(&report, &label, eps);
            if winner.is_none_or(|(_, s)| score < s) {
                winner = Some((eps, score));
            }
            cells.push(ScanCell {
                snr_db: snr,
                epsilon: eps,
                rho: p.solver.rho,
                zeta: p.solver.zeta,
                score,
                rmse: agg.rmse,
                recovery_rate: agg.recovery_rate,
            });
        }
        best.push((snr, winner.expect("non-empty grid").0));
    }
    best.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(EpsilonScan { cells, best })
}

/// [`epsilon_scan`] over the plan's own scan grid and SNRs.
pub fn epsilon_scan_plan(plan: &ExperimentPlan) -> Result<EpsilonScan, BenchError> {
    epsilon_scan(plan, &plan.scan.epsilons, &snr_grid(plan))
}

/// Score of every `(ρ, ζ)` pair at every plan SNR, `ε` following the
/// plan's epsilon policy.
pub fn rho_zeta_scan(plan: &ExperimentPlan) -> Result<Vec<ScanCell>, BenchError> {
    let (rhos, zetas) = (&plan.scan.rhos, &plan.scan.zetas);
    if rhos.is_empty() || zetas.is_empty() {
        return Err(BenchError::Plan("rho/zeta scan needs non-empty grids".into()));
    }
    let method = scan_method(plan);
    let label = method.label();
    let snrs = snr_grid(plan);
    let mut cells = Vec::new();
    for &rho in rhos {
        for &zeta in zetas {
            let mut p = plan.clone();
            p.solver.rho = rho;
            p.solver.zeta = zeta;
            p.methods = vec![method.clone()];
            p.crlb = false;
            p.sweep = Sweep {
                variable: SweepVariable::SnrDb,
                values: snrs.clone(),
            };
            let report = run_sweep(&p)?;
            for &snr in &snrs {
                let agg = report.aggregate(&label, snr).expect("every sweep value is aggregated");
                cells.push(ScanCell {
                    snr_db: snr,
                    epsilon: p.point(snr).solver.epsilon,
                    rho,
                    zeta,
                    score: scan_score(&report, &label, snr),
                    rmse: agg.rmse,
                    recovery_rate: agg.recovery_rate,
                });
            }
        }
    }
    Ok(cells)
}

pub fn rho_zeta_csv(cells: &[ScanCell]) -> String {
    cells_csv(cells)
}
