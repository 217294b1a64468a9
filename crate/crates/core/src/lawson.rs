//! Dual Lawson-norm signal recovery.
//!
//! Recovers the RIS-incident signal `z` from `y = G·z + v` by solving
//!
//! ```text
//! min_{e,z}  ‖e‖_La1 + ρ‖z‖_La2   s.t.  e = y − G·z
//! ```
//!
//! with a Bregman ADMM. The Lawson norm
//! `‖v‖_La = Σ |v_k|² / (|v_k|² + λ²)^((2−p)/2)` behaves like `‖v‖₂²` near
//! zero and like `Σ|v_k|^p` for `|v_k| ≫ λ`, so with `p1 < 1` the residual
//! term `e` absorbs impulsive outliers instead of letting them bias `z`.
//!
//! Each iteration is closed-form: a diagonal solve for `e`, an `M×M`
//! Hermitian positive-definite solve for `z`, a dual ascent step on `ξ` and a
//! geometric annealing of `λ1` down to a floor.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::linalg;
use crate::scene::RisControlMatrix;
use crate::{CMatrix, CVector, Error, Result};

/// Which Lawson parameters weight the `z` regulariser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HzConvention {
    /// `H_z` uses `(p2, λ2)`, the parameters of the La2 norm it differentiates.
    #[default]
    RegularizerParams,
    /// `H_z` uses the residual norm's `(p1, λ1)`.
    ResidualParams,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LawsonParams {
    /// Exponent of the residual norm La1.
    pub p1: f64,
    /// Exponent of the signal regulariser La2.
    pub p2: f64,
    /// Initial smoothing of La1; annealed every iteration.
    pub lambda1: f64,
    /// Smoothing of La2; held fixed.
    pub lambda2: f64,
    /// Regularisation weight `ρ`.
    pub rho: f64,
    /// Augmented-Lagrangian penalty `ε`.
    pub epsilon: f64,
    /// Bregman proximal weight `ζ`.
    pub zeta: f64,
    /// Annealing factor for `λ1`, in `(0, 1)`.
    pub eta: f64,
    pub lambda1_floor: f64,
    pub max_iter: usize,
    /// Scale `y` to unit RMS before solving and undo it afterwards, which
    /// makes the absolute smoothing constants refer to a fixed signal level.
    pub normalize: bool,
    pub hz_convention: HzConvention,
}

impl Default for LawsonParams {
    fn default() -> Self {
        Self {
            p1: 0.4,
            p2: 1.0,
            lambda1: 0.3,
            lambda2: 0.001,
            rho: 0.1,
            epsilon: 1.0,
            zeta: 1e-2,
            eta: 0.9,
            lambda1_floor: 0.01,
            max_iter: 40,
            normalize: true,
            hz_convention: HzConvention::RegularizerParams,
        }
    }
}

impl LawsonParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=2.0).contains(&p) {
                return Err(Error::param(name, "Lawson exponent must lie in [0, 2]"));
            }
        }
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("rho", self.rho),
            ("epsilon", self.epsilon),
            ("lambda1_floor", self.lambda1_floor),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.zeta >= 0.0) || !self.zeta.is_finite() {
            return Err(Error::param("zeta", "must be non-negative"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::param("eta", "must lie in (0, 1)"));
        }
        if self.lambda1 < self.lambda1_floor {
            return Err(Error::param("lambda1", "must not start below lambda1_floor"));
        }
        Ok(())
    }
}

fn check_smoothing(lambda: f64) -> Result<()> {
    if lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "lambda",
            format!("smoothing must be positive, got {lambda}"),
        ))
    }
}

/// `Σ_k |v_k|² / (|v_k|² + λ²)^((2−p)/2)`.
pub fn lawson_norm(v: &CVector, lambda: f64, p: f64) -> Result<f64> {
    check_smoothing(lambda)?;
    let l2 = lambda * lambda;
    let expo = (2.0 - p) / 2.0;
    Ok(v.iter()
        .map(|c| {
            let a = c.norm_sqr();
            if expo == 0.0 {
                a
            } else {
                a / (a + l2).powf(expo)
            }
        })
        .sum())
}

/// Diagonal of `H` with `∇_{v*}‖v‖_La = ½·H·v`:
/// `h_k = (p|v_k|² + 2λ²) / (|v_k|² + λ²)^((4−p)/2)`.
pub fn weight_matrix(v: &CVector, lambda: f64, p: f64) -> Result<DVector<f64>> {
    check_smoothing(lambda)?;
    Ok(weights_unchecked(v, lambda, p))
}

fn weights_unchecked(v: &CVector, lambda: f64, p: f64) -> DVector<f64> {
    let l2 = lambda * lambda;
    let expo = (4.0 - p) / 2.0;
    DVector::from_iterator(
        v.len(),
        v.iter().map(|c| {
            let a = c.norm_sqr();
            (p * a + 2.0 * l2) / (a + l2).powf(expo)
        }),
    )
}

/// Live iterates of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Residual estimate, length `K`.
    pub e: CVector,
    /// Signal estimate, length `M`.
    pub z: CVector,
    /// Dual variable, length `K`.
    pub xi: CVector,
    pub iter: usize,
    /// Current (annealed) `λ1`.
    pub lambda1: f64,
}

impl SolverState {
    /// All-zero iterates with `λ1` at its starting value.
    pub fn zeros(slots: usize, elements: usize, params: &LawsonParams) -> Self {
        Self {
            e: CVector::zeros(slots),
            z: CVector::zeros(elements),
            xi: CVector::zeros(slots),
            iter: 0,
            lambda1: params.lambda1,
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            e: &self.e * Complex64::from(factor),
            z: &self.z * Complex64::from(factor),
            xi: &self.xi * Complex64::from(factor),
            iter: self.iter,
            lambda1: self.lambda1,
        }
    }
}

/// One row of the per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// `‖e − y + G·z‖₂` after the step.
    pub primal_residual: f64,
    /// `‖e‖_La1` at the `λ1` used in the step.
    pub lawson_e: f64,
    /// `‖z‖_La2`.
    pub lawson_z: f64,
}

/// Result of [`LawsonAdmm::solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub z: CVector,
    pub state: SolverState,
    /// Diagnostics in the solver's internal units (unit-RMS `y` when
    /// normalising).
    pub trace: Vec<TraceRow>,
}

/// Bregman-ADMM solver bound to one control matrix; caches `Gᴴ` and `GᴴG`.
#[derive(Debug, Clone)]
pub struct LawsonAdmm {
    g: CMatrix,
    gh: CMatrix,
    ghg: CMatrix,
    params: LawsonParams,
}

impl LawsonAdmm {
    pub fn new(g: &RisControlMatrix, params: LawsonParams) -> Result<Self> {
        Self::from_matrix(g.matrix().clone(), params)
    }

    pub fn from_matrix(g: CMatrix, params: LawsonParams) -> Result<Self> {
        params.validate()?;
        if g.nrows() == 0 || g.ncols() == 0 {
            return Err(Error::config("control matrix must be non-empty"));
        }
        let gh = g.adjoint();
        let ghg = &gh * &g;
        Ok(Self { g, gh, ghg, params })
    }

    pub fn params(&self) -> &LawsonParams {
        &self.params
    }

    pub fn initial_state(&self) -> SolverState {
        SolverState::zeros(self.g.nrows(), self.g.ncols(), &self.params)
    }

    fn check_shapes(&self, state: &SolverState, y: &CVector) -> Result<()> {
        let (k, m) = self.g.shape();
        let shape_err = |context, expected, found| Error::Shape {
            context,
            expected: (expected, 1),
            found: (found, 1),
        };
        if y.len() != k {
            return Err(shape_err("measurement y", k, y.len()));
        }
        if state.e.len() != k {
            return Err(shape_err("residual e", k, state.e.len()));
        }
        if state.xi.len() != k {
            return Err(shape_err("dual xi", k, state.xi.len()));
        }
        if state.z.len() != m {
            return Err(shape_err("signal z", m, state.z.len()));
        }
        Ok(())
    }

    /// One ADMM iteration in place; returns its diagnostics row.
    ///
    /// The weights `H_e`, `H_z` are taken at the incoming iterates; then `e`,
    /// `z` and `ξ` are updated in that order and `λ1` is annealed.
    pub fn step(&self, state: &mut SolverState, y: &CVector) -> Result<TraceRow> {
        self.check_shapes(state, y)?;
        let p = &self.params;
        let eps = p.epsilon;
        let zeta = p.zeta;
        let inv_eps = Complex64::from(1.0 / eps);

        let h_e = weights_unchecked(&state.e, state.lambda1, p.p1);
        let h_z = match p.hz_convention {
            HzConvention::RegularizerParams => weights_unchecked(&state.z, p.lambda2, p.p2),
            HzConvention::ResidualParams => weights_unchecked(&state.z, state.lambda1, p.p1),
        };

        // e ← (H_e + (ε+ζ)I)⁻¹ (ε·u + ζ·e),  u = y − G·z − ξ/ε
        let gz = &self.g * &state.z;
        for k in 0..y.len() {
            let u = y[k] - gz[k] - state.xi[k] * inv_eps;
            state.e[k] = (u * eps + state.e[k] * zeta) / (h_e[k] + eps + zeta);
        }

        // z ← (ρH_z + (ε+ζ)GᴴG)⁻¹ (ε·Gᴴt + ζ·z),  t = y − e − ξ/ε
        let t = CVector::from_fn(y.len(), |k, _| y[k] - state.e[k] - state.xi[k] * inv_eps);
        let mut system = &self.ghg * Complex64::from(eps + zeta);
        for m in 0..system.nrows() {
            system[(m, m)] += p.rho * h_z[m];
        }
        let rhs = &self.gh * t * Complex64::from(eps) + &state.z * Complex64::from(zeta);
        state.z = linalg::solve_hpd(system, &rhs)
            .map_err(|e| Error::Numerical(format!("z-update at iteration {}: {e}", state.iter)))?;

        // ξ ← ξ + ε(e − y + G·z)
        let gz = &self.g * &state.z;
        let mut primal = 0.0;
        for k in 0..y.len() {
            let r = state.e[k] - y[k] + gz[k];
            primal += r.norm_sqr();
            state.xi[k] += r * eps;
        }

        let row = TraceRow {
            iter: state.iter,
            primal_residual: primal.sqrt(),
            lawson_e: lawson_norm(&state.e, state.lambda1, p.p1)?,
            lawson_z: lawson_norm(&state.z, p.lambda2, p.p2)?,
        };
        state.lambda1 = (p.eta * state.lambda1).max(p.lambda1_floor);
        state.iter += 1;
        Ok(row)
    }

    /// Runs `max_iter` iterations from `initial` (zeros when `None`).
    pub fn solve(&self, y: &CVector, initial: Option<SolverState>) -> Result<Solution> {
        let scale = if self.params.normalize {
            let rms = (y.norm_squared() / y.len().max(1) as f64).sqrt();
            if rms > 0.0 && rms.is_finite() {
                rms
            } else {
                1.0
            }
        } else {
            1.0
        };
        let y_int = y / Complex64::from(scale);
        let mut state = match initial {
            Some(s) => s.scaled(1.0 / scale),
            None => self.initial_state(),
        };
        self.check_shapes(&state, &y_int)?;
        let mut trace = Vec::with_capacity(self.params.max_iter);
        while state.iter < self.params.max_iter {
            trace.push(self.step(&mut state, &y_int)?);
        }
        let state = state.scaled(scale);
        Ok(Solution {
            z: state.z.clone(),
            state,
            trace,
        })
    }
}

/// Single iteration without a cached solver; recomputes `GᴴG`.
pub fn admm_step(state: &SolverState, y: &CVector, g: &RisControlMatrix, params: &LawsonParams) -> Result<SolverState> {
    let solver = LawsonAdmm::new(g, params.clone())?;
    let mut next = state.clone();
    solver.step(&mut next, y)?;
    Ok(next)
}

/// Optimal penalty `ε` as a function of SNR, from a parameter scan.
///
/// Knots are `(snr_db, epsilon)` sorted by SNR; lookups interpolate linearly
/// and clamp outside the knot range.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>"))]
pub struct EpsilonTable {
    knots: Vec<(f64, f64)>,
}

/// Scanned optimum of `ε` per SNR for the default scene and solver.
pub const DEFAULT_EPSILON_KNOTS: &[(f64, f64)] = &[
    (-10.0, 0.7),
    (-5.0, 0.7),
    (0.0, 0.7),
    (5.0, 0.5),
    (10.0, 1.0),
    (15.0, 1.5),
    (20.0, 2.0),
];

impl EpsilonTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::config("epsilon table is empty"));
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::config("epsilon table must be strictly increasing in SNR"));
        }
        if knots.iter().any(|&(s, e)| !s.is_finite() || !(e > 0.0)) {
            return Err(Error::config(
                "epsilon table entries must be finite with positive epsilon",
            ));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn lookup(&self, snr_db: f64) -> f64 {
        interpolate(&self.knots, snr_db)
    }
}

impl Default for EpsilonTable {
    fn default() -> Self {
        Self {
            knots: DEFAULT_EPSILON_KNOTS.to_vec(),
        }
    }
}

impl TryFrom<Vec<(f64, f64)>> for EpsilonTable {
    type Error = Error;

    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(knots)
    }
}

impl From<EpsilonTable> for Vec<(f64, f64)> {
    fn from(t: EpsilonTable) -> Self {
        t.knots
    }
}

/// Interpolated `ε` at `snr_db` from `(snr_db, ε)` knots sorted by SNR.
pub fn epsilon_for_snr(snr_db: f64, knots: &[(f64, f64)]) -> Result<f64> {
    if knots.is_empty() {
        return Err(Error::config("epsilon table is empty"));
    }
    Ok(interpolate(knots, snr_db))
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|k| k.0 <= x);
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
