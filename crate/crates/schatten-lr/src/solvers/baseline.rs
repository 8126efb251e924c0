//! Trace-norm proximal-gradient baseline for matrix completion.
//!
//! Minimizes `mu ||X||_tr + 1/2 ||A(X) - b||_2^2` over the full matrix by
//! repeated singular value thresholding. The sampling operator has unit
//! operator norm, so the gradient step size is 1. This is the comparison
//! point the factored solvers are measured against; it carries the full
//! `m x n` SVD cost per iteration that they avoid.

use super::check_not_empty;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::observations::ObservationSet;
use crate::prox::svt;

/// Relative iterate change below which further sweeps cannot move the result.
const BASELINE_REL_TOL: f64 = 1e-10;

pub fn trace_baseline_mc(obs: &ObservationSet, mu: f64, iters: usize) -> Result<DenseMatrix> {
    check_not_empty(obs)?;
    if !(mu >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mu must be non-negative, got {mu}"
        )));
    }
    let b = obs.values();
    let mut x = DenseMatrix::zeros(obs.host_rows(), obs.host_cols());
    for _ in 0..iters {
        let fitted = obs.project(&x)?;
        let residual: Vec<f64> = fitted.iter().zip(&b).map(|(f, t)| f - t).collect();
        let gradient = obs.scatter(&residual)?;
        let next = svt(&x.sub(&gradient), mu)?;
        let delta = next.sub(&x).frobenius_norm() / (1.0 + x.frobenius_norm());
        x = next;
        if delta < BASELINE_REL_TOL {
            break;
        }
    }
    Ok(x)
}
