//! Accuracy metrics for DOA estimates.
//!
//! Estimates and truths are both sorted ascending and paired positionally.

use alloc::vec::Vec;

use crate::{Error, Result};

/// A trial whose RMSE exceeds this many degrees counts as a failure.
pub const FAILURE_THRESHOLD_DEG: f64 = 5.0;

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `‖θ̂ − θ‖²` in degrees² after sorted pairing.
pub fn squared_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::Shape {
            context: "estimate vs truth",
            expected: (truth.len(), 1),
            found: (estimate.len(), 1),
        });
    }
    Ok(sorted(estimate)
        .iter()
        .zip(sorted(truth))
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// RMSE of one trial, `sqrt(‖θ̂ − θ‖² / N)`.
pub fn trial_rmse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::config("no targets to compare"));
    }
    Ok((squared_error(estimate, truth)? / truth.len() as f64).sqrt())
}

/// `sqrt(Σ_trials ‖θ̂ − θ‖² / (N·N_MC))`.
pub fn rmse(estimates: &[Vec<f64>], truths: &[Vec<f64>]) -> Result<f64> {
    if estimates.len() != truths.len() {
        return Err(Error::Shape {
            context: "trial count",
            expected: (truths.len(), 1),
            found: (estimates.len(), 1),
        });
    }
    if truths.is_empty() {
        return Err(Error::config("no trials"));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (e, t) in estimates.iter().zip(truths) {
        total += squared_error(e, t)?;
        count += t.len();
    }
    if count == 0 {
        return Err(Error::config("no targets to compare"));
    }
    Ok((total / count as f64).sqrt())
}

/// Failure iff the estimate is missing (fewer than `N` peaks) or its trial
/// RMSE exceeds [`FAILURE_THRESHOLD_DEG`].
pub fn is_failure(estimate: Option<&[f64]>, truth: &[f64]) -> bool {
    match estimate {
        Some(e) if e.len() == truth.len() => trial_rmse(e, truth).map_or(true, |r| !(r <= FAILURE_THRESHOLD_DEG)),
        _ => true,
    }
}

/// Successes over trials.
pub fn recovery_rate(successes: usize, trials: usize) -> f64 {
    if trials == 0 {
        0.0
    } else {
        successes as f64 / trials as f64
    }
}
