//! Flat-file formats: control matrices, spectra, solver traces, CRLB tables.

use std::fmt::Write as _;
use std::path::Path;

use lnmusic_core::crlb::{crlb_theta, fisher};
use lnmusic_core::lawson::TraceRow;
use lnmusic_core::{CMatrix, Complex64, RisControlMatrix, SpatialSpectrum};
use rayon::prelude::*;

use crate::plan::{ExperimentPlan, SweepVariable};
use crate::report::{into_string, num, opt};
use crate::runner::{draw_trial, with_workers};
use crate::BenchError;

const G_HEADER: &str = "# lnmusic control matrix: line 1 is \"K M\", then K rows of M entries as \"re im\" pairs";

/// Text form of `G`; numbers are written with enough digits to round-trip.
pub fn format_control_matrix(g: &RisControlMatrix) -> String {
    let m = g.matrix();
    let mut out = format!("{G_HEADER}\n{} {}\n", m.nrows(), m.ncols());
    for k in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols())
            .map(|j| format!("{} {}", m[(k, j)].re, m[(k, j)].im))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_control_matrix(text: &str) -> Result<RisControlMatrix, BenchError> {
    let bad = |m: String| BenchError::Format(format!("control matrix: {m}"));
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let dims: Vec<usize> = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad dimension {t:?}"))))
        .collect::<Result<_, _>>()?;
    let [k, m] = dims[..] else {
        return Err(bad("first line must be \"K M\"".into()));
    };
    let mut g = CMatrix::zeros(k, m);
    for row in 0..k {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("expected {k} rows, found {row}")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("row {row}: bad number {t:?}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != 2 * m {
            return Err(bad(format!(
                "row {row}: expected {} numbers, found {}",
                2 * m,
                vals.len()
            )));
        }
        for j in 0..m {
            g[(row, j)] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    if lines.next().is_some() {
        return Err(bad(format!("more than {k} rows")));
    }
    Ok(RisControlMatrix::new(g))
}

pub fn read_control_matrix(path: &Path) -> Result<RisControlMatrix, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_control_matrix(&text)
}

/// Two columns, `angle_deg,value`.
pub fn spectrum_csv(s: &SpatialSpectrum) -> String {
    let mut out = String::from("angle_deg,value\n");
    for (a, v) in s.angles.iter().zip(&s.values) {
        writeln!(out, "{},{}", num(*a), num(*v)).expect("string write");
    }
    out
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("iter,primal_residual,lawson_e,lawson_z\n");
    for r in trace {
        writeln!(
            out,
            "{},{},{},{}",
            r.iter,
            num(r.primal_residual),
            num(r.lawson_e),
            num(r.lawson_z)
        )
        .expect("string write");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbRow {
    pub snr_db: f64,
    /// Over the trials' random control matrices.
    pub random_deg: Option<f64>,
    /// Over the trials' ROSM control matrices.
    pub rosm_deg: Option<f64>,
}

fn rms(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt())
}

/// CRLB against SNR, root-mean-square over the plan's trials.
pub fn crlb_table(plan: &ExperimentPlan) -> Result<Vec<CrlbRow>, BenchError> {
    plan.validate()?;
    let (snrs, fixed_value) = if plan.sweep.variable == SweepVariable::SnrDb {
        (plan.sweep.values.clone(), None)
    } else {
        (vec![plan.noise.snr_db], Some(plan.sweep.values[0]))
    };
    let mut p = plan.clone();
    p.noiseless = false;
    let p = &p;
    let rows = with_workers(plan.workers, || {
        snrs.par_iter()
            .map(|&snr| {
                let point = p.point(fixed_value.unwrap_or(snr));
                let mut random = Vec::new();
                let mut rosm = Vec::new();
                for t in 0..p.trials {
                    let Ok(d) = draw_trial(p, &point, p.base_seed + t as u64, true) else {
                        continue;
                    };
                    let var = d.point.noise.total_variance(d.sigma2);
                    for (use_rosm, out) in [(false, &mut random), (true, &mut rosm)] {
                        if let Ok(b) = fisher(&d.point.scene, d.control(use_rosm), var).and_then(|f| crlb_theta(&f)) {
                            out.push(b.rmse_deg);
                        }
                    }
                }
                CrlbRow {
                    snr_db: snr,
                    random_deg: rms(&random),
                    rosm_deg: rms(&rosm),
                }
            })
            .collect::<Vec<_>>()
    })?;
    Ok(rows)
}

pub fn crlb_csv(rows: &[CrlbRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["snr_db", "crlb_random_deg", "crlb_rosm_deg"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([num(r.snr_db), opt(r.random_deg), opt(r.rosm_deg)])
            .expect("in-memory write");
    }
    into_string(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn control_matrix_round_trips_exactly() {
        let g = RisControlMatrix::random(&mut ChaCha8Rng::seed_from_u64(1), 7, 5);
        let back = parse_control_matrix(&format_control_matrix(&g)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn malformed_control_matrices() {
        for text in ["", "2", "1 1\n1", "1 1\n1 0\n1 0", "1 1\nx 0", "2 1\n1 0"] {
            assert!(parse_control_matrix(text).is_err(), "{text:?}");
        }
    }

    #[test]
    fn trace_header() {
        let csv = trace_csv(&[TraceRow {
            iter: 0,
            primal_residual: 0.5,
            lawson_e: 1.0,
            lawson_z: 2.0,
        }]);
        assert_eq!(csv, "iter,primal_residual,lawson_e,lawson_z\n0,0.5,1,2\n");
    }
}
