//! Reference estimators: orthogonal matching pursuit on an angle grid and
//! ℓp-residual recovery with an ℓ1 regulariser (Lp-ADM).

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::{solve_hpd, solve_hpd_checked};
use crate::scene::{steering_entries, RisControlMatrix};
use crate::{deg_to_rad, CMatrix, CVector, Error, Result};

/// `K×P` dictionary whose column `p` is `G·a(angle_p)` scaled to unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDictionary {
    pub angles: Vec<f64>,
    pub atoms: CMatrix,
    /// `‖G·a(angle_p)‖`, so `atom_p · scale_p` is the unnormalised column.
    pub scales: Vec<f64>,
}

impl GridDictionary {
    pub fn new(g: &RisControlMatrix, angles: Vec<f64>, varphi_deg: f64, spacing: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::config("empty angle grid"));
        }
        let m = g.elements();
        let mut a = CMatrix::zeros(m, angles.len());
        for (p, theta) in angles.iter().enumerate() {
            a.set_column(p, &steering_entries(deg_to_rad(theta + varphi_deg), m, spacing));
        }
        let mut atoms = g.matrix() * a;
        let mut scales = Vec::with_capacity(angles.len());
        for mut col in atoms.column_iter_mut() {
            let n = col.norm();
            if n > 0.0 {
                col.unscale_mut(n);
            }
            scales.push(n);
        }
        Ok(Self { angles, atoms, scales })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmpResult {
    /// Selected angles, ascending.
    pub angles: Vec<f64>,
    /// Selected atom indices in selection order.
    pub support: Vec<usize>,
    /// `‖r‖` before the first selection and after each one.
    pub residual_norms: Vec<f64>,
    /// Least-squares coefficients of the normalised atoms, in selection order.
    pub coefficients: CVector,
    /// Set when `y = 0`; the support is then just the first free indices.
    pub degenerate: bool,
}

/// Greedy selection of `count` atoms with a least-squares refit after each.
pub fn omp(y: &CVector, dict: &GridDictionary, count: usize) -> Result<OmpResult> {
    if y.len() != dict.atoms.nrows() {
        return Err(Error::Shape {
            context: "measurement y",
            expected: (dict.atoms.nrows(), 1),
            found: (y.len(), 1),
        });
    }
    if count == 0 || count > dict.len() {
        return Err(Error::param(
            "count",
            format!("need 1..={} atoms, got {count}", dict.len()),
        ));
    }
    let degenerate = y.norm_squared() == 0.0;
    let mut residual = y.clone();
    let mut support: Vec<usize> = Vec::with_capacity(count);
    let mut residual_norms = alloc::vec![residual.norm()];
    let mut coefficients = CVector::zeros(0);
    for _ in 0..count {
        let corr = dict.atoms.ad_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for (p, c) in corr.iter().enumerate() {
            if support.contains(&p) {
                continue;
            }
            let v = c.norm_sqr();
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((p, v));
            }
        }
        let (p, _) = best.expect("count <= dictionary size");
        support.push(p);
        let sub = dict.atoms.select_columns(support.iter());
        coefficients = solve_hpd_checked(sub.ad_mul(&sub), &sub.ad_mul(y), 1e-7)
            .map_err(|e| Error::Numerical(format!("OMP refit with {} atoms: {e}", support.len())))?;
        residual = y - &sub * &coefficients;
        residual_norms.push(residual.norm());
    }
    let mut angles: Vec<f64> = support.iter().map(|&p| dict.angles[p]).collect();
    angles.sort_by(f64::total_cmp);
    Ok(OmpResult {
        angles,
        support,
        residual_norms,
        coefficients,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LpAdmParams {
    /// Residual exponent, `0 < p ≤ 2`.
    pub p: f64,
    /// ℓ1 weight.
    pub rho: f64,
    /// Smoothing in `(|r|² + δ²)^(p/2)`.
    pub delta: f64,
    pub max_iter: usize,
    /// First trial step of the line search.
    pub step: f64,
    /// Step shrink factor on a failed sufficient-decrease test.
    pub backtrack: f64,
    /// Scale `y` to unit RMS before solving.
    pub normalize: bool,
}

impl Default for LpAdmParams {
    fn default() -> Self {
        Self {
            p: 0.7,
            rho: 0.1,
            delta: 1e-6,
            max_iter: 200,
            step: 1.0,
            backtrack: 0.5,
            normalize: true,
        }
    }
}

impl LpAdmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 2.0) {
            return Err(Error::param("p", "must lie in (0, 2]"));
        }
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(Error::param("rho", "must be non-negative"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::param("delta", "must be positive"));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::param("step", "step size must be positive"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::param("backtrack", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpAdmSolution {
    pub z: CVector,
    /// Objective after initialisation and after every accepted step, in the
    /// solver's internal (normalised) units.
    pub objective: Vec<f64>,
}

/// `Σ (|r_k|² + δ²)^(p/2) + ρ‖z‖₁` with `r = y − G·z`.
pub fn lp_objective(y: &CVector, g: &CMatrix, z: &CVector, params: &LpAdmParams) -> f64 {
    smooth_lp(&(y - g * z), params) + params.rho * l1(z)
}

fn smooth_lp(r: &CVector, params: &LpAdmParams) -> f64 {
    let d2 = params.delta * params.delta;
    r.iter().map(|c| (c.norm_sqr() + d2).powf(params.p / 2.0)).sum()
}

fn l1(z: &CVector) -> f64 {
    z.iter().map(|c| c.norm()).sum()
}

/// Complex soft threshold `z·max(0, 1 − τ/|z|)`.
fn soft_threshold(z: &CVector, tau: f64) -> CVector {
    z.map(|c| {
        let a = c.norm();
        if a <= tau {
            Complex64::new(0.0, 0.0)
        } else {
            c * ((a - tau) / a)
        }
    })
}

/// Proximal gradient with backtracking on the smoothed ℓp residual,
/// initialised at the least-squares solution (zero when `GᴴG` is singular).
pub fn lp_adm(y: &CVector, g: &RisControlMatrix, params: &LpAdmParams) -> Result<LpAdmSolution> {
    params.validate()?;
    let gm = g.matrix();
    if y.len() != gm.nrows() {
        return Err(Error::Shape {
            context: "measurement y",
            expected: (gm.nrows(), 1),
            found: (y.len(), 1),
        });
    }
    let scale = if params.normalize {
        let rms = (y.norm_squared() / y.len().max(1) as f64).sqrt();
        if rms > 0.0 && rms.is_finite() {
            rms
        } else {
            1.0
        }
    } else {
        1.0
    };
    let y = y / Complex64::from(scale);
    let gh = gm.adjoint();
    let d2 = params.delta * params.delta;

    let mut z = solve_hpd(&gh * gm, &(&gh * &y)).unwrap_or_else(|_| CVector::zeros(gm.ncols()));
    let mut r = &y - gm * &z;
    let mut f = smooth_lp(&r, params);
    let mut objective = alloc::vec![f + params.rho * l1(&z)];
    let mut step = params.step;

    for _ in 0..params.max_iter {
        // Packed real gradient of the smooth part: −p·Gᴴ(w ⊙ r).
        let wr = CVector::from_fn(r.len(), |k, _| r[k] * (r[k].norm_sqr() + d2).powf(params.p / 2.0 - 1.0));
        let grad = (&gh * wr) * Complex64::from(-params.p);
        let mut accepted = None;
        let mut t = step;
        while t > 1e-30 {
            let cand = soft_threshold(&(&z - &grad * Complex64::from(t)), t * params.rho);
            let diff = &cand - &z;
            let r_c = &y - gm * &cand;
            let f_c = smooth_lp(&r_c, params);
            let bound = f + grad.dotc(&diff).re + diff.norm_squared() / (2.0 * t);
            if f_c <= bound {
                accepted = Some((cand, r_c, f_c));
                break;
            }
            t *= params.backtrack;
        }
        let Some((cand, r_c, f_c)) = accepted else {
            break;
        };
        let obj = f_c + params.rho * l1(&cand);
        if obj > *objective.last().expect("non-empty") {
            break;
        }
        z = cand;
        r = r_c;
        f = f_c;
        objective.push(obj);
        step = (t / params.backtrack).min(params.step);
    }

    Ok(LpAdmSolution {
        z: z * Complex64::from(scale),
        objective,
    })
}
