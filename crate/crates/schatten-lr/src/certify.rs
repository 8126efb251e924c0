//! Numerical certification battery for the quasi-norm identities.
//!
//! Each check runs over a seeded population of low-rank matrices and
//! records its worst deviation against an independent oracle:
//!
//! * the factored bi-trace/tri-trace evaluators against the direct
//!   Schatten power sums,
//! * the factorization lower bound (no refactorization dips below the
//!   Schatten value),
//! * unitary invariance and absolute homogeneity,
//! * the nested norm chain with its rank caps.
//!
//! The battery is what the `verify` subcommand runs and what the
//! acceptance suite pins at fixed parameters.

use crate::error::Result;
use crate::factors::FactorPair;
use crate::matrix::DenseMatrix;
use crate::norms::{bi_trace, bi_trace_surrogate, quasi_norm_chain, schatten_quasi_norm, tri_trace};
use crate::rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Battery parameters. `fault_offset` is a test hook: it shifts every
/// bi-trace evaluation inside the battery so the failure path can be
/// exercised end to end; leave it at 0 for real runs.
#[derive(Debug, Clone)]
pub struct CertifyConfig {
    /// Number of seeded instances per check.
    pub trials: usize,
    /// Maximum matrix dimension.
    pub max_dim: usize,
    /// Random factorizations per instance in the minimality check.
    pub factorizations: usize,
    pub seed: u64,
    pub fault_offset: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            max_dim: 20,
            factorizations: 100,
            seed: 0x5eed,
            fault_offset: 0.0,
        }
    }
}

/// Outcome of one certification check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: &'static str, cases: usize, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name,
            cases,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

struct InstancePool {
    matrices: Vec<(DenseMatrix, usize)>,
}

impl InstancePool {
    /// Seeded low-rank matrices with dims in `[1, max_dim]` and every rank
    /// up to the smaller dimension represented.
    fn generate(cfg: &CertifyConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut matrices = Vec::with_capacity(cfg.trials);
        for _ in 0..cfg.trials {
            let m = rng.random_range(1..=cfg.max_dim);
            let n = rng.random_range(1..=cfg.max_dim);
            let r = rng.random_range(1..=m.min(n));
            let p = rng::gaussian_matrix(m, r, rng);
            let q = rng::gaussian_matrix(n, r, rng);
            matrices.push((p.matmul(&q.transpose()), r));
        }
        Self { matrices }
    }
}

/// Runs the full battery and returns one report per check.
pub fn run_certification(cfg: &CertifyConfig) -> Result<Vec<CheckReport>> {
    let mut rng = rng::seeded(cfg.seed);
    let pool = InstancePool::generate(cfg, &mut rng);
    let mut reports = Vec::new();

    // Factored evaluators vs. the Schatten power sums.
    let mut dev_bi: f64 = 0.0;
    let mut dev_tri: f64 = 0.0;
    for (x, _) in &pool.matrices {
        let s_half = schatten_quasi_norm(x, 0.5)?;
        let bi = bi_trace(x)? + cfg.fault_offset;
        dev_bi = dev_bi.max((bi - s_half).abs() / (1.0 + s_half));
        let s_third = schatten_quasi_norm(x, 1.0 / 3.0)?;
        let tri = tri_trace(x)?;
        dev_tri = dev_tri.max((tri - s_third).abs() / (1.0 + s_third));
    }
    reports.push(CheckReport::new(
        "bi-trace equals Schatten-1/2",
        pool.matrices.len(),
        dev_bi,
        1e-8,
    ));
    reports.push(CheckReport::new(
        "tri-trace equals Schatten-1/3",
        pool.matrices.len(),
        dev_tri,
        1e-8,
    ));

    // Minimality: random refactorizations never undercut the Schatten value.
    let mut dev_min: f64 = 0.0;
    let mut cases = 0;
    for (x, r) in &pool.matrices {
        let s_half = schatten_quasi_norm(x, 0.5)?;
        let d = (r + 2).min(x.rows()).min(x.cols());
        let svd = crate::matrix::thin_svd(x)?;
        let roots: Vec<f64> = svd.singulars[..d].iter().map(|&s| s.sqrt()).collect();
        let u0 = DenseMatrix::from_fn(x.rows(), d, |i, j| svd.left.get(i, j) * roots[j]);
        let v0 = DenseMatrix::from_fn(x.cols(), d, |i, j| svd.right.get(i, j) * roots[j]);
        for _ in 0..cfg.factorizations {
            let q1 = rng::random_orthogonal(d, &mut rng);
            let q2 = rng::random_orthogonal(d, &mut rng);
            let scales: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
            let inverse: Vec<f64> = scales.iter().map(|s| 1.0 / s).collect();
            let g = q1.scale_cols(&scales).matmul(&q2.transpose());
            let g_inv_t = q1.scale_cols(&inverse).matmul(&q2.transpose());
            let fp = FactorPair::new(u0.matmul(&g), v0.matmul(&g_inv_t))?;
            let surrogate = bi_trace_surrogate(&fp)?;
            dev_min = dev_min.max(s_half - surrogate);
            cases += 1;
        }
    }
    reports.push(CheckReport::new(
        "factorization lower bound",
        cases,
        dev_min,
        1e-8,
    ));

    // Unitary invariance of both quasi-norms.
    let mut dev_unitary: f64 = 0.0;
    for (x, _) in &pool.matrices {
        let p = rng::random_orthogonal(x.rows(), &mut rng);
        let q = rng::random_orthogonal(x.cols(), &mut rng);
        let rotated = p.matmul(x).matmul(&q.transpose());
        let (a, b) = (bi_trace(x)?, bi_trace(&rotated)?);
        dev_unitary = dev_unitary.max((a - b).abs() / (1.0 + a));
        let (a3, b3) = (tri_trace(x)?, tri_trace(&rotated)?);
        dev_unitary = dev_unitary.max((a3 - b3).abs() / (1.0 + a3));
    }
    reports.push(CheckReport::new(
        "unitary invariance",
        pool.matrices.len(),
        dev_unitary,
        1e-8,
    ));

    // Norm chain with rank caps, using the known generation rank.
    let mut dev_chain: f64 = 0.0;
    for (x, r) in &pool.matrices {
        let chain = quasi_norm_chain(x)?;
        let r = *r as f64;
        let scale = 1.0 + chain.rank_bound;
        dev_chain = dev_chain.max((chain.trace - chain.bi_trace) / scale);
        dev_chain = dev_chain.max((chain.bi_trace - chain.tri_trace) / scale);
        dev_chain = dev_chain.max((chain.tri_trace - r * r * chain.trace) / scale);
        dev_chain = dev_chain.max((chain.bi_trace - r * chain.trace) / scale);
    }
    reports.push(CheckReport::new(
        "norm chain with rank caps",
        pool.matrices.len(),
        dev_chain,
        1e-8,
    ));

    // Absolute homogeneity.
    let mut dev_hom: f64 = 0.0;
    for (x, _) in &pool.matrices {
        let a: f64 = rng.random_range(-10.0..10.0);
        let want = a.abs() * bi_trace(x)?;
        let got = bi_trace(&x.scale(a))?;
        dev_hom = dev_hom.max((got - want).abs() / (1.0 + want));
    }
    reports.push(CheckReport::new(
        "absolute homogeneity",
        pool.matrices.len(),
        dev_hom,
        1e-10,
    ));

    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_battery_passes() {
        let cfg = CertifyConfig {
            trials: 20,
            max_dim: 8,
            factorizations: 10,
            ..CertifyConfig::default()
        };
        let reports = run_certification(&cfg).unwrap();
        assert_eq!(reports.len(), 6);
        for r in &reports {
            assert!(r.passed, "{} deviated by {}", r.name, r.max_deviation);
        }
    }

    #[test]
    fn injected_fault_is_caught() {
        let cfg = CertifyConfig {
            trials: 10,
            max_dim: 6,
            factorizations: 5,
            fault_offset: 1e-3,
            ..CertifyConfig::default()
        };
        let reports = run_certification(&cfg).unwrap();
        assert!(!all_passed(&reports));
        let bi = reports
            .iter()
            .find(|r| r.name.starts_with("bi-trace"))
            .unwrap();
        assert!(!bi.passed);
    }
}
