//! Evaluation measures and the data-dependent recovery constants.

use crate::error::{Error, Result};
use crate::factors::FactorPair;
use crate::matrix::DenseMatrix;
use crate::observations::ObservationSet;
use serde::Serialize;

/// Metrics attached to a finished run. Absent fields are omitted from the
/// serialized form (an undefined AUC simply does not appear).
#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c3_lower_bound: Option<f64>,
}

/// Relative recovery error `||X - X0||_F / ||X0||_F`.
pub fn rse(x: &DenseMatrix, x0: &DenseMatrix) -> Result<f64> {
    if (x.rows(), x.cols()) != (x0.rows(), x0.cols()) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", x0.rows(), x0.cols()),
            got: format!("{}x{}", x.rows(), x.cols()),
        });
    }
    let denom = x0.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "RSE reference matrix must be nonzero".into(),
        ));
    }
    Ok(x.sub(x0).frobenius_norm() / denom)
}

/// Root mean squared error over paired predictions and truths.
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidArgument(
            "RMSE needs a non-empty test set".into(),
        ));
    }
    if predictions.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} truths", predictions.len()),
            got: format!("{}", truths.len()),
        });
    }
    let sum: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sum / predictions.len() as f64).sqrt())
}

/// Probability that a random positive outranks a random negative, ties
/// counted half (the Mann-Whitney form). Runs in `O(n log n)` via midranks;
/// the test suite pins it against the all-pairs count.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} labels", scores.len()),
            got: format!("{}", labels.len()),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidArgument(
            "AUC needs at least one positive and one negative label".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of midranks over positives: tied scores share the average rank.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0; // average of ranks i+1 ..= j
        for &idx in &order[i..j] {
            if labels[idx] {
                rank_sum += midrank;
            }
        }
        i = j;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// F1 score of a detected support: entries with `|estimate| > threshold`
/// against a ground-truth mask.
pub fn support_f1(estimate: &[f64], truth: &[bool], threshold: f64) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} mask entries", estimate.len()),
            got: format!("{}", truth.len()),
        });
    }
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fneg = 0.0;
    for (detected, &actual) in estimate.iter().map(|v| v.abs() > threshold).zip(truth) {
        match (detected, actual) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fneg += 1.0,
            (false, false) => {}
        }
    }
    if tp + fp + fneg == 0.0 {
        // Nothing to detect and nothing detected.
        return Ok(1.0);
    }
    Ok(2.0 * tp / (2.0 * tp + fp + fneg))
}

/// The completion-side recovery constant:
/// `||P(D - U V^T) V||_F / ||P(D - U V^T)||_F` at a fitted factor pair,
/// where `P` reads the observed cells. Undefined on a perfect fit.
pub fn c3_constant(obs: &ObservationSet, factors: &FactorPair) -> Result<f64> {
    let fitted = obs.project_pair(&factors.u, &factors.v);
    let residual: Vec<f64> = obs
        .values()
        .iter()
        .zip(&fitted)
        .map(|(b, f)| b - f)
        .collect();
    let denom = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::Undefined(
            "recovery constant",
            "residual is zero (perfect fit)".into(),
        ));
    }
    let numer = obs.scatter_times(&residual, &factors.v).frobenius_norm();
    Ok(numer / denom)
}

/// The general-operator recovery constant:
/// `||A*(b - A(U V^T)) V||_F / ||b - A(U V^T)||_2`, evaluated through the
/// explicit adjoint scatter.
pub fn c1_constant(obs: &ObservationSet, factors: &FactorPair) -> Result<f64> {
    let fitted = obs.project_pair(&factors.u, &factors.v);
    let residual: Vec<f64> = obs
        .values()
        .iter()
        .zip(&fitted)
        .map(|(b, f)| b - f)
        .collect();
    let denom = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::Undefined(
            "recovery constant",
            "residual is zero (perfect fit)".into(),
        ));
    }
    let adjoint = obs.scatter(&residual)?;
    let numer = adjoint.matmul(&factors.v).frobenius_norm();
    Ok(numer / denom)
}

/// Lower bound `sqrt(mu) / (2 sqrt(2 gamma))` with
/// `gamma = ||b||_2^2 / (2 mu)`; every fitted critical point's constant
/// exceeds it.
pub fn c3_lower_bound(mu: f64, observed_values_norm: f64) -> f64 {
    let gamma = observed_values_norm * observed_values_norm / (2.0 * mu);
    mu.sqrt() / (2.0 * (2.0 * gamma).sqrt())
}
