//! Factored solvers for low-rank recovery.
//!
//! Two families share the same skeleton — linearize the smooth coupling
//! term at the current block, take a gradient step with the Lipschitz-bound
//! step size, then apply the block's proximal map:
//!
//! * [`palm_bitr_mc`] / [`palm_tritr_mc`] — alternating proximal-linearized
//!   minimization for matrix completion with a squared loss. Each sweep is
//!   a guaranteed descent step on the objective.
//! * [`ladm_bitr`] / [`ladm_tritr`] — an augmented-Lagrangian scheme for
//!   constrained recovery with a non-smooth (`l1` or `l1/2`) loss on an
//!   auxiliary residual `e`, with a geometric penalty schedule.
//!
//! [`trace_baseline_mc`] is a plain trace-norm proximal-gradient solver used
//! as a comparison point.

mod baseline;
mod ladm;
mod palm;

pub use baseline::trace_baseline_mc;
pub use ladm::{ladm_bitr, ladm_tritr};
pub use palm::{palm_bitr_mc, palm_tritr_mc};

use crate::error::{Error, Result};
use crate::factors::{Factors, InitMode};
use crate::matrix::{spectral_norm, DenseMatrix};
use crate::observations::ObservationSet;
use serde::Serialize;

/// Configuration for the PALM matrix-completion solvers.
#[derive(Debug, Clone)]
pub struct PalmConfig {
    /// Inner rank `d` of the factorization.
    pub inner_rank: usize,
    /// Regularization weight on the loss term.
    pub mu: f64,
    pub max_iters: usize,
    /// Stop when the relative iterate change falls below this.
    pub rel_tol: f64,
    /// Multiplier (>= 1) on the Lipschitz step-size bound.
    pub step_safety: f64,
    pub seed: u64,
    /// Step-size floor engaged when a factor collapses to zero.
    pub t_min: f64,
    pub init: InitMode,
}

impl PalmConfig {
    pub fn new(inner_rank: usize, mu: f64) -> Self {
        Self {
            inner_rank,
            mu,
            max_iters: 500,
            rel_tol: 1e-4,
            step_safety: 1.0,
            seed: 0,
            t_min: 1e-8,
            init: InitMode::SpectralWarm,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.inner_rank == 0 {
            return Err(Error::InvalidArgument("inner rank must be positive".into()));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("rel_tol must be positive".into()));
        }
        if self.step_safety < 1.0 {
            return Err(Error::InvalidArgument(
                "step_safety must be at least 1".into(),
            ));
        }
        if !(self.t_min > 0.0) {
            return Err(Error::InvalidArgument("t_min must be positive".into()));
        }
        Ok(())
    }
}

/// Loss applied to the auxiliary residual `e` in the LADM solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// `||e||_1`, handled by soft thresholding.
    L1,
    /// `||e||_{1/2}^{1/2}`, handled by half thresholding.
    LHalf,
}

/// Configuration for the LADM constrained/robust solvers.
#[derive(Debug, Clone)]
pub struct LadmConfig {
    pub inner_rank: usize,
    pub mu: f64,
    /// Initial penalty.
    pub beta0: f64,
    /// Penalty cap.
    pub beta_max: f64,
    /// Penalty growth factor (> 1).
    pub rho: f64,
    /// Feasibility tolerance for the stopping rule.
    pub eps: f64,
    pub max_iters: usize,
    pub loss: Loss,
    pub seed: u64,
    pub t_min: f64,
    /// Multiplier (>= 1) on the Lipschitz step-size bound.
    pub step_safety: f64,
    pub init: InitMode,
}

impl LadmConfig {
    pub fn new(inner_rank: usize, mu: f64) -> Self {
        Self {
            inner_rank,
            mu,
            beta0: 1e-4,
            beta_max: 1e20,
            rho: 1.1,
            eps: 1e-4,
            max_iters: 1000,
            loss: Loss::L1,
            seed: 0,
            t_min: 1e-8,
            step_safety: 1.0,
            init: InitMode::SpectralWarm,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.inner_rank == 0 {
            return Err(Error::InvalidArgument("inner rank must be positive".into()));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidArgument("mu must be positive".into()));
        }
        if !(self.beta0 > 0.0) || self.beta0 > self.beta_max {
            return Err(Error::InvalidArgument(format!(
                "need 0 < beta0 <= beta_max, got {} and {}",
                self.beta0, self.beta_max
            )));
        }
        if !(self.rho > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rho must exceed 1, got {}",
                self.rho
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument("eps must be positive".into()));
        }
        if self.step_safety < 1.0 {
            return Err(Error::InvalidArgument(
                "step_safety must be at least 1".into(),
            ));
        }
        if !(self.t_min > 0.0) {
            return Err(Error::InvalidArgument("t_min must be positive".into()));
        }
        Ok(())
    }
}

/// One iteration's worth of evidence.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub objective: f64,
    /// `||A(X) - b - e||_2`; absent for PALM, which has no constraint.
    pub feasibility: Option<f64>,
    pub step_u: f64,
    pub step_v: f64,
    /// Present only for three-factor solves.
    pub step_w: Option<f64>,
    /// Penalty parameter; LADM only.
    pub beta: Option<f64>,
    /// `||state_k - state_{k-1}||_F / (1 + ||state_{k-1}||_F)`.
    pub iterate_delta: f64,
    /// `||lambda||_inf` after the multiplier update; LADM only.
    pub multiplier_inf: Option<f64>,
}

/// Per-iteration record of a solver run: the raw evidence behind the
/// descent, feasibility and convergence claims.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.objective).collect()
    }

    pub fn feasibilities(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.feasibility).collect()
    }

    pub fn iterate_deltas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iterate_delta).collect()
    }
}

/// Why a solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolverStatus {
    Converged,
    MaxIters,
}

/// Terminal state of a solver run.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub factors: Factors,
    pub status: SolverStatus,
    pub iterations: usize,
    pub trace: SolverTrace,
    /// Distance to the first-order stationarity norm bounds at the final
    /// iterate; near zero at a critical point.
    pub kkt_residual: f64,
    /// Terminal auxiliary residual `e` at the observed cells in canonical
    /// order (LADM only): the sparse-corruption estimate in robust runs.
    pub sparse: Option<Vec<f64>>,
}

impl RecoveryResult {
    /// The recovered dense matrix.
    pub fn recovered(&self) -> DenseMatrix {
        self.factors.product()
    }
}

/// Lipschitz step size for a block update whose fixed co-factor is `factor`:
/// `max(op_norm_aa * ||factor^T factor||_2, t_min) * safety`.
///
/// For sampling operators `op_norm_aa` is 1. The Gram form lets the
/// decomposition run on a `d x d` matrix rather than the tall factor.
pub fn step_size(factor: &DenseMatrix, op_norm_aa: f64, t_min: f64, safety: f64) -> Result<f64> {
    let gram = factor.transpose().matmul(factor);
    let bound = op_norm_aa * spectral_norm(&gram)?;
    Ok(bound.max(t_min) * safety)
}

/// Stationarity gap of a two-factor matrix-completion solution: how far the
/// residual-times-factor spectral norms exceed the `mu/2` cap implied by
/// first-order optimality. Zero (to rounding) at a critical point.
pub fn kkt_residual_mc(result: &RecoveryResult, obs: &ObservationSet, mu: f64) -> Result<f64> {
    let b = obs.values();
    match &result.factors {
        Factors::Pair(fp) => {
            let fitted = obs.project_pair(&fp.u, &fp.v);
            let residual: Vec<f64> = b.iter().zip(&fitted).map(|(x, y)| x - y).collect();
            let q_u = obs.scatter_times(&residual, &fp.v);
            let q_v = obs.scatter_transpose_times(&residual, &fp.u);
            let cap = mu / 2.0;
            Ok((spectral_norm(&q_u)? - cap).max(0.0) + (spectral_norm(&q_v)? - cap).max(0.0))
        }
        Factors::Triple(ft) => {
            let fitted = obs.project_triple(&ft.u, &ft.v, &ft.w);
            let residual: Vec<f64> = b.iter().zip(&fitted).map(|(x, y)| x - y).collect();
            // Effective co-factors: X = U (W V^T)^T = (U V) W^T.
            let z = ft.w.matmul(&ft.v.transpose());
            let y = ft.u.matmul(&ft.v);
            let q_u = obs.scatter_times(&residual, &z);
            let q_v = ft
                .u
                .transpose()
                .matmul(&obs.scatter_times(&residual, &ft.w));
            let q_w = obs.scatter_transpose_times(&residual, &y);
            let cap = mu / 3.0;
            Ok((spectral_norm(&q_u)? - cap).max(0.0)
                + (spectral_norm(&q_v)? - cap).max(0.0)
                + (spectral_norm(&q_w)? - cap).max(0.0))
        }
    }
}

pub(crate) fn check_not_empty(obs: &ObservationSet) -> Result<()> {
    if obs.is_empty() {
        return Err(Error::InvalidArgument(
            "observation set must be non-empty".into(),
        ));
    }
    Ok(())
}

pub(crate) fn guard_finite(
    objective: f64,
    iteration: usize,
    trace: &SolverTrace,
) -> Result<()> {
    if objective.is_finite() {
        Ok(())
    } else {
        Err(Error::SolverDiverged {
            what: format!("objective became {objective}"),
            iteration,
            trace: Box::new(trace.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::thin_svd;
    use crate::testutil::{random_orthogonal, seeded_matrix};

    #[test]
    fn step_size_on_scaled_orthonormal_columns() {
        // Columns scaled by 2 give factor^T factor = 4 I.
        let q = random_orthogonal(5, 3);
        let factor = DenseMatrix::from_fn(5, 3, |i, j| 2.0 * q.get(i, j));
        let t = step_size(&factor, 1.0, 1e-8, 1.0).unwrap();
        assert!((t - 4.0).abs() < 1e-10);
    }

    #[test]
    fn step_size_floor_engages_on_zero_factor() {
        let zero = DenseMatrix::zeros(4, 2);
        assert_eq!(step_size(&zero, 1.0, 1e-8, 1.0).unwrap(), 1e-8);
    }

    #[test]
    fn step_size_matches_squared_top_singular_value() {
        let factor = seeded_matrix(8, 3, 41);
        let t = step_size(&factor, 1.0, 1e-8, 1.0).unwrap();
        let sigma1 = thin_svd(&factor).unwrap().singulars[0];
        assert!((t - sigma1 * sigma1).abs() < 1e-10 * (1.0 + sigma1 * sigma1));
    }
}
