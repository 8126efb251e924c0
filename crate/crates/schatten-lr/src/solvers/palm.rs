//! Proximal alternating linearized minimization for matrix completion.
//!
//! Objective (two-factor form):
//! `(||U||_tr + ||V||_tr) / 2 + ||A(U V^T) - b||_2^2 / (2 mu)`,
//! where `A` reads the observed cells. Each block update linearizes the
//! quadratic coupling at the current point and applies singular value
//! thresholding; with the step size at the Lipschitz bound the objective
//! never increases, which is asserted by the test suite on every seeded run.

use super::{
    check_not_empty, guard_finite, kkt_residual_mc, step_size, PalmConfig, RecoveryResult,
    SolverStatus, SolverTrace, TraceRow,
};
use crate::error::Result;
use crate::factors::{init_factor_triple, init_factors, Factors};
use crate::matrix::spectral_norm;
use crate::norms::trace_norm;
use crate::observations::ObservationSet;
use crate::prox::svt;

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn residual(fitted: &[f64], b: &[f64]) -> Vec<f64> {
    fitted.iter().zip(b).map(|(f, t)| f - t).collect()
}

/// Two-factor (bi-trace penalized) matrix completion.
pub fn palm_bitr_mc(obs: &ObservationSet, cfg: &PalmConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    check_not_empty(obs)?;
    let b = obs.values();
    let mut fp = init_factors(obs, cfg.inner_rank, cfg.seed, cfg.init)?;
    let mut trace = SolverTrace::default();
    let mut status = SolverStatus::MaxIters;
    let mut iterations = cfg.max_iters;

    for k in 0..cfg.max_iters {
        let prev = fp.clone();

        let t_u = step_size(&fp.v, 1.0, cfg.t_min, cfg.step_safety)?;
        let r_u = residual(&obs.project_pair(&fp.u, &fp.v), &b);
        let grad_u = obs.scatter_times(&r_u, &fp.v);
        fp.u = svt(&fp.u.sub(&grad_u.scale(1.0 / t_u)), cfg.mu / (2.0 * t_u))?;

        let t_v = step_size(&fp.u, 1.0, cfg.t_min, cfg.step_safety)?;
        let r_v = residual(&obs.project_pair(&fp.u, &fp.v), &b);
        let grad_v = obs.scatter_transpose_times(&r_v, &fp.u);
        fp.v = svt(&fp.v.sub(&grad_v.scale(1.0 / t_v)), cfg.mu / (2.0 * t_v))?;

        let loss = squared_norm(&residual(&obs.project_pair(&fp.u, &fp.v), &b));
        let objective =
            (trace_norm(&fp.u)? + trace_norm(&fp.v)?) / 2.0 + loss / (2.0 * cfg.mu);
        guard_finite(objective, k, &trace)?;
        let iterate_delta = fp.distance(&prev) / (1.0 + prev.norm());
        trace.rows.push(TraceRow {
            objective,
            feasibility: None,
            step_u: t_u,
            step_v: t_v,
            step_w: None,
            beta: None,
            iterate_delta,
            multiplier_inf: None,
        });
        if iterate_delta < cfg.rel_tol {
            status = SolverStatus::Converged;
            iterations = k + 1;
            break;
        }
    }

    let mut result = RecoveryResult {
        factors: Factors::Pair(fp),
        status,
        iterations,
        trace,
        kkt_residual: 0.0,
        sparse: None,
    };
    result.kkt_residual = kkt_residual_mc(&result, obs, cfg.mu)?;
    Ok(result)
}

/// Three-factor (tri-trace penalized) matrix completion.
///
/// `X = U V W^T`; each block sees the other two through an effective
/// co-factor (`Z = W V^T` for the `U` step, `Y = U V` for the `W` step),
/// which reduces every update to the two-factor pattern.
pub fn palm_tritr_mc(obs: &ObservationSet, cfg: &PalmConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    check_not_empty(obs)?;
    let b = obs.values();
    let mut ft = init_factor_triple(obs, cfg.inner_rank, cfg.seed, cfg.init)?;
    let mut trace = SolverTrace::default();
    let mut status = SolverStatus::MaxIters;
    let mut iterations = cfg.max_iters;

    for k in 0..cfg.max_iters {
        let prev = ft.clone();

        let z = ft.w.matmul(&ft.v.transpose());
        let t_u = step_size(&z, 1.0, cfg.t_min, cfg.step_safety)?;
        let r = residual(&obs.project_pair(&ft.u, &z), &b);
        let grad_u = obs.scatter_times(&r, &z);
        ft.u = svt(&ft.u.sub(&grad_u.scale(1.0 / t_u)), cfg.mu / (3.0 * t_u))?;

        // Lipschitz bound for the core block: (||U||_2 ||W||_2)^2.
        let bound = (spectral_norm(&ft.u)? * spectral_norm(&ft.w)?).powi(2);
        let t_v = bound.max(cfg.t_min) * cfg.step_safety;
        let r = residual(&obs.project_triple(&ft.u, &ft.v, &ft.w), &b);
        let grad_v = ft.u.transpose().matmul(&obs.scatter_times(&r, &ft.w));
        ft.v = svt(&ft.v.sub(&grad_v.scale(1.0 / t_v)), cfg.mu / (3.0 * t_v))?;

        let y = ft.u.matmul(&ft.v);
        let t_w = step_size(&y, 1.0, cfg.t_min, cfg.step_safety)?;
        let r = residual(&obs.project_pair(&y, &ft.w), &b);
        let grad_w = obs.scatter_transpose_times(&r, &y);
        ft.w = svt(&ft.w.sub(&grad_w.scale(1.0 / t_w)), cfg.mu / (3.0 * t_w))?;

        let loss = squared_norm(&residual(&obs.project_triple(&ft.u, &ft.v, &ft.w), &b));
        let objective = (trace_norm(&ft.u)? + trace_norm(&ft.v)? + trace_norm(&ft.w)?) / 3.0
            + loss / (2.0 * cfg.mu);
        guard_finite(objective, k, &trace)?;
        let iterate_delta = ft.distance(&prev) / (1.0 + prev.norm());
        trace.rows.push(TraceRow {
            objective,
            feasibility: None,
            step_u: t_u,
            step_v: t_v,
            step_w: Some(t_w),
            beta: None,
            iterate_delta,
            multiplier_inf: None,
        });
        if iterate_delta < cfg.rel_tol {
            status = SolverStatus::Converged;
            iterations = k + 1;
            break;
        }
    }

    let mut result = RecoveryResult {
        factors: Factors::Triple(ft),
        status,
        iterations,
        trace,
        kkt_residual: 0.0,
        sparse: None,
    };
    result.kkt_residual = kkt_residual_mc(&result, obs, cfg.mu)?;
    Ok(result)
}
