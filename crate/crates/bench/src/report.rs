//! Per-trial rows, aggregates and their CSV form.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::plan::ExperimentPlan;
use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub method: String,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub truth: Vec<f64>,
    /// `None` when the estimator returned an error (e.g. too few peaks).
    pub estimate: Option<Vec<f64>>,
    /// `‖θ̂ − θ‖²` in degrees².
    pub sq_error: Option<f64>,
    pub success: bool,
    /// Received power `‖y‖²/K` of the measurement the method saw.
    pub srp: Option<f64>,
    /// CRLB for this trial's control matrix, degrees.
    pub crlb_deg: Option<f64>,
    pub error: Option<String>,
}

impl TrialRow {
    pub fn trial_rmse(&self) -> Option<f64> {
        self.sq_error.map(|e| (e / self.truth.len() as f64).sqrt())
    }
}

/// Summary of one method at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: String,
    pub sweep_value: f64,
    pub trials: usize,
    /// Trials that produced `N` angles.
    pub estimated: usize,
    pub successes: usize,
    pub recovery_rate: f64,
    /// Over the estimated trials; `None` when there were none.
    pub rmse: Option<f64>,
    pub mean_srp: Option<f64>,
    /// `sqrt(mean over trials of CRLB²)`, comparable with `rmse`.
    pub crlb_deg: Option<f64>,
}

impl Aggregate {
    /// Aggregates rows that all belong to one method and sweep value.
    pub fn from_rows(rows: &[&TrialRow]) -> Self {
        let first = rows[0];
        let trials = rows.len();
        let targets = first.truth.len() as f64;
        let errors: Vec<f64> = rows.iter().filter_map(|r| r.sq_error).collect();
        let successes = rows.iter().filter(|r| r.success).count();
        let srps: Vec<f64> = rows.iter().filter_map(|r| r.srp).collect();
        let crlbs: Vec<f64> = rows.iter().filter_map(|r| r.crlb_deg).collect();
        Self {
            method: first.method.clone(),
            sweep_value: first.sweep_value,
            trials,
            estimated: errors.len(),
            successes,
            recovery_rate: successes as f64 / trials as f64,
            rmse: (!errors.is_empty()).then(|| (errors.iter().sum::<f64>() / (targets * errors.len() as f64)).sqrt()),
            mean_srp: (!srps.is_empty()).then(|| srps.iter().sum::<f64>() / srps.len() as f64),
            crlb_deg: (!crlbs.is_empty())
                .then(|| (crlbs.iter().map(|c| c * c).sum::<f64>() / crlbs.len() as f64).sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    pub fn new(plan: ExperimentPlan, rows: Vec<TrialRow>) -> Self {
        let mut aggregates = Vec::new();
        for &value in &plan.sweep.values {
            for m in &plan.methods {
                let label = m.label();
                let group: Vec<&TrialRow> = rows
                    .iter()
                    .filter(|r| r.method == label && r.sweep_value == value)
                    .collect();
                if !group.is_empty() {
                    aggregates.push(Aggregate::from_rows(&group));
                }
            }
        }
        Self { plan, rows, aggregates }
    }

    pub fn aggregate(&self, method: &str, sweep_value: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.sweep_value == sweep_value)
    }

    /// `(sweep value, rmse)` for one method in sweep order.
    pub fn rmse_curve(&self, method: &str) -> Vec<(f64, Option<f64>)> {
        self.aggregates
            .iter()
            .filter(|a| a.method == method)
            .map(|a| (a.sweep_value, a.rmse))
            .collect()
    }

    pub fn rows_csv(&self) -> String {
        let var = self.plan.sweep.variable.as_str();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "method",
            var,
            "trial",
            "seed",
            "truth_deg",
            "estimate_deg",
            "sq_error",
            "trial_rmse",
            "success",
            "srp",
            "crlb_deg",
            "error",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.method.clone(),
                num(r.sweep_value),
                r.trial.to_string(),
                r.seed.to_string(),
                join(&r.truth),
                r.estimate.as_deref().map(join).unwrap_or_default(),
                opt(r.sq_error),
                opt(r.trial_rmse()),
                u8::from(r.success).to_string(),
                opt(r.srp),
                opt(r.crlb_deg),
                r.error.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        into_string(w)
    }

    pub fn aggregates_csv(&self) -> String {
        let var = self.plan.sweep.variable.as_str();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "method",
            var,
            "trials",
            "estimated",
            "successes",
            "recovery_rate",
            "rmse_deg",
            "mean_srp",
            "crlb_deg",
        ])
        .expect("in-memory write");
        for a in &self.aggregates {
            w.write_record([
                a.method.clone(),
                num(a.sweep_value),
                a.trials.to_string(),
                a.estimated.to_string(),
                a.successes.to_string(),
                num(a.recovery_rate),
                opt(a.rmse),
                opt(a.mean_srp),
                opt(a.crlb_deg),
            ])
            .expect("in-memory write");
        }
        into_string(w)
    }

    /// Writes `<name>.csv`, `<name>.summary.csv` and the plan sidecar
    /// `<name>.plan.toml` into `dir`; returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
        let name = &self.plan.name;
        let files = [
            (dir.join(format!("{name}.csv")), self.rows_csv()),
            (dir.join(format!("{name}.summary.csv")), self.aggregates_csv()),
            (dir.join(format!("{name}.plan.toml")), self.plan.to_toml()),
        ];
        write_files(dir, &files)
    }
}

/// Creates `dir` and writes each `(path, body)`.
pub fn write_files(dir: &Path, files: &[(PathBuf, String)]) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut out = Vec::new();
    for (path, body) in files {
        let mut f = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
        f.write_all(body.as_bytes()).map_err(|e| BenchError::io(path, e))?;
        out.push(path.clone());
    }
    Ok(out)
}

pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

pub(crate) fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, sq: Option<f64>, success: bool) -> TrialRow {
        TrialRow {
            method: method.into(),
            sweep_value: 0.0,
            trial: 0,
            seed: 0,
            truth: vec![-20.0, 0.0, 25.0],
            estimate: sq.map(|_| vec![-20.0, 0.0, 25.0]),
            sq_error: sq,
            success,
            srp: Some(2.0),
            crlb_deg: Some(0.5),
            error: None,
        }
    }

    #[test]
    fn aggregate_pools_squared_errors() {
        let rows = [
            row("a", Some(1.0), true),
            row("a", Some(4.0), true),
            row("a", None, false),
        ];
        let refs: Vec<&TrialRow> = rows.iter().collect();
        let a = Aggregate::from_rows(&refs);
        assert_eq!(a.trials, 3);
        assert_eq!(a.estimated, 2);
        assert_eq!(a.successes, 2);
        assert_eq!(a.recovery_rate, 2.0 / 3.0);
        assert_eq!(a.rmse, Some((5.0f64 / 6.0).sqrt()));
        assert_eq!(a.mean_srp, Some(2.0));
        assert_eq!(a.crlb_deg, Some(0.5));
    }

    #[test]
    fn csv_cells() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(-5.0), "-5");
        assert_eq!(opt(None), "");
        assert_eq!(join(&[1.5, -2.0]), "1.5;-2");
    }
}
