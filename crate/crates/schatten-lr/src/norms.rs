//! Schatten quasi-norms and their factored forms.
//!
//! For `0 < p < 1` the Schatten-`p` quasi-norm `(sum_i sigma_i^p)^(1/p)`
//! interpolates between the trace norm (`p = 1`) and the rank function
//! (`p -> 0`). The factored evaluators here — [`bi_trace`] and
//! [`tri_trace`] — compute the same quantities for `p = 1/2` and `p = 1/3`
//! through products of factor trace norms instead of a power sum, which is
//! what makes them certifiable against [`schatten_quasi_norm`]: the two
//! routes share nothing but the input matrix.

use crate::error::{Error, Result};
use crate::factors::FactorPair;
use crate::matrix::{thin_svd, DenseMatrix};

/// `(sum_i sigma_i(x)^p)^(1/p)` for `p` in `(0, 2]`.
///
/// Singular values below [`NUMERICAL_RANK_CUTOFF`] relative to the largest
/// are treated as exact zeros. For `p < 1` the power sum is non-Lipschitz
/// at zero, so rounding-level singular values of a rank-deficient matrix
/// would otherwise contaminate the value far beyond working precision.
pub fn schatten_quasi_norm(x: &DenseMatrix, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "Schatten exponent must lie in (0, 2], got {p}"
        )));
    }
    let svd = thin_svd(x)?;
    let floor = NUMERICAL_RANK_CUTOFF * svd.singulars.first().copied().unwrap_or(0.0);
    let sum: f64 = svd
        .singulars
        .iter()
        .filter(|&&s| s > floor)
        .map(|&s| s.powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Sum of singular values (the trace / nuclear norm).
pub fn trace_norm(x: &DenseMatrix) -> Result<f64> {
    Ok(thin_svd(x)?.singulars.iter().sum())
}

/// Root of the sum of squared entries.
pub fn fro_norm(x: &DenseMatrix) -> f64 {
    x.frobenius_norm()
}

/// Evaluates the bi-trace quasi-norm of `x`:
/// the minimum of `||U||_tr * ||V||_tr` over factorizations `X = U V^T`.
///
/// The minimum is attained by the balanced split `U = L sqrt(S)`,
/// `V = R sqrt(S)` of the thin SVD `X = L S R^T`, so this builds those two
/// factors and multiplies their trace norms. The value equals the
/// Schatten-1/2 quasi-norm; the solvers' surrogate objectives upper-bound it.
pub fn bi_trace(x: &DenseMatrix) -> Result<f64> {
    let svd = thin_svd(x)?;
    let roots = cut_roots(&svd.singulars, f64::sqrt);
    let u = svd.left.scale_cols(&roots);
    let v = svd.right.scale_cols(&roots);
    Ok(trace_norm(&u)? * trace_norm(&v)?)
}

/// Roots of the singular values with the sub-cutoff tail zeroed, so the
/// constructed factors carry no rounding-noise columns.
fn cut_roots(singulars: &[f64], root: impl Fn(f64) -> f64) -> Vec<f64> {
    let floor = NUMERICAL_RANK_CUTOFF * singulars.first().copied().unwrap_or(0.0);
    singulars
        .iter()
        .map(|&s| if s > floor { root(s) } else { 0.0 })
        .collect()
}

/// Evaluates the tri-trace quasi-norm of `x`:
/// the minimum of `||U||_tr * ||V||_tr * ||W||_tr` over `X = U V W^T`.
///
/// Attained by the symmetric cube-root split of the thin SVD, with the
/// middle factor the diagonal of cube-rooted singular values. Equals the
/// Schatten-1/3 quasi-norm.
pub fn tri_trace(x: &DenseMatrix) -> Result<f64> {
    let svd = thin_svd(x)?;
    let roots = cut_roots(&svd.singulars, f64::cbrt);
    let u = svd.left.scale_cols(&roots);
    let v = DenseMatrix::diag(&roots);
    let w = svd.right.scale_cols(&roots);
    Ok(trace_norm(&u)? * trace_norm(&v)? * trace_norm(&w)?)
}

/// The squared-mean surrogate `((||U||_tr + ||V||_tr) / 2)^2` minimized by
/// the two-factor solvers; an upper bound on the Schatten-1/2 quasi-norm of
/// `U V^T`, tight exactly at the balanced SVD split.
pub fn bi_trace_surrogate(fp: &FactorPair) -> Result<f64> {
    let mean = (trace_norm(&fp.u)? + trace_norm(&fp.v)?) / 2.0;
    Ok(mean * mean)
}

/// Relative cutoff defining the numerical rank used by [`quasi_norm_chain`]:
/// singular values above `1e-10 * sigma_1` count.
pub const NUMERICAL_RANK_CUTOFF: f64 = 1e-10;

/// The nested norm chain of a matrix, in non-decreasing order.
#[derive(Debug, Clone, Copy)]
pub struct NormChain {
    /// Trace norm.
    pub trace: f64,
    /// Bi-trace (Schatten-1/2) quasi-norm.
    pub bi_trace: f64,
    /// Tri-trace (Schatten-1/3) quasi-norm.
    pub tri_trace: f64,
    /// Upper cap `r^2 * trace` with `r` the numerical rank.
    pub rank_bound: f64,
    /// Numerical rank used for the cap.
    pub numerical_rank: usize,
}

impl NormChain {
    /// `(trace, bi_trace, tri_trace, rank_bound)` as the ordered tuple.
    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.trace, self.bi_trace, self.tri_trace, self.rank_bound)
    }
}

/// Evaluates `trace <= bi-trace <= tri-trace <= r^2 * trace` for `x`.
///
/// The quasi-norms grow with tighter rank approximation, and the numerical
/// rank caps the whole chain; the intermediate bound
/// `bi-trace <= r * trace` holds as well.
pub fn quasi_norm_chain(x: &DenseMatrix) -> Result<NormChain> {
    let svd = thin_svd(x)?;
    let top = svd.singulars.first().copied().unwrap_or(0.0);
    let numerical_rank = svd
        .singulars
        .iter()
        .filter(|&&s| s > NUMERICAL_RANK_CUTOFF * top)
        .count();
    let trace = trace_norm(x)?;
    Ok(NormChain {
        trace,
        bi_trace: bi_trace(x)?,
        tri_trace: tri_trace(x)?,
        rank_bound: (numerical_rank * numerical_rank) as f64 * trace,
        numerical_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::FactorPair;
    use crate::matrix::spectral_norm;
    use crate::rng;
    use crate::testutil::{random_orthogonal, seeded_low_rank, seeded_matrix};
    use rand::Rng;

    #[test]
    fn exponent_range_is_enforced() {
        let m = DenseMatrix::identity(2);
        assert!(schatten_quasi_norm(&m, 0.0).is_err());
        assert!(schatten_quasi_norm(&m, 2.1).is_err());
        assert!(schatten_quasi_norm(&m, -0.5).is_err());
    }

    #[test]
    fn diagonal_values() {
        let zero = DenseMatrix::zeros(3, 4);
        assert_eq!(schatten_quasi_norm(&zero, 0.5).unwrap(), 0.0);
        assert_eq!(bi_trace(&zero).unwrap(), 0.0);
        assert_eq!(tri_trace(&zero).unwrap(), 0.0);

        // (sqrt(4) + sqrt(1))^2 = 9 and (2 + 1)^3 = 27 on the diagonal cases.
        let d41 = DenseMatrix::diag(&[4.0, 1.0]);
        assert!((schatten_quasi_norm(&d41, 0.5).unwrap() - 9.0).abs() < 1e-10);
        assert!((bi_trace(&d41).unwrap() - 9.0).abs() < 1e-10);

        let d81 = DenseMatrix::diag(&[8.0, 1.0]);
        assert!((schatten_quasi_norm(&d81, 1.0 / 3.0).unwrap() - 27.0).abs() < 1e-9);
        assert!((tri_trace(&d81).unwrap() - 27.0).abs() < 1e-9);
    }

    #[test]
    fn schatten_one_and_two_match_trace_and_frobenius() {
        let m = seeded_matrix(6, 4, 17);
        let tr = trace_norm(&m).unwrap();
        assert!((schatten_quasi_norm(&m, 1.0).unwrap() - tr).abs() < 1e-10 * tr);
        let fr = fro_norm(&m);
        assert!((schatten_quasi_norm(&m, 2.0).unwrap() - fr).abs() < 1e-10 * fr);
        assert!((trace_norm(&DenseMatrix::identity(3)).unwrap() - 3.0).abs() < 1e-12);
        assert!((fro_norm(&DenseMatrix::identity(3)) - 3f64.sqrt()).abs() < 1e-12);
        assert!((trace_norm(&DenseMatrix::diag(&[3.0, 1.0])).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn factored_routes_match_schatten_route_on_low_rank_input() {
        let x = seeded_low_rank(6, 6, 3, 23);
        let s_half = schatten_quasi_norm(&x, 0.5).unwrap();
        let bi = bi_trace(&x).unwrap();
        assert!((bi - s_half).abs() <= 1e-10 * s_half, "{bi} vs {s_half}");
        let s_third = schatten_quasi_norm(&x, 1.0 / 3.0).unwrap();
        let tri = tri_trace(&x).unwrap();
        assert!((tri - s_third).abs() <= 1e-10 * s_third, "{tri} vs {s_third}");
    }

    #[test]
    fn surrogate_attains_bound_at_balanced_split_and_never_below() {
        let d41 = DenseMatrix::diag(&[4.0, 1.0]);
        let svd = crate::matrix::thin_svd(&d41).unwrap();
        let roots: Vec<f64> = svd.singulars.iter().map(|&s| s.sqrt()).collect();
        let star = FactorPair::new(
            svd.left.scale_cols(&roots),
            svd.right.scale_cols(&roots),
        )
        .unwrap();
        assert!((bi_trace_surrogate(&star).unwrap() - 9.0).abs() < 1e-10);

        let zero = FactorPair::new(DenseMatrix::zeros(3, 2), DenseMatrix::zeros(3, 2)).unwrap();
        assert_eq!(bi_trace_surrogate(&zero).unwrap(), 0.0);

        // Random refactorizations of a fixed rank-2 matrix stay above the
        // Schatten-1/2 value.
        let x = seeded_low_rank(5, 5, 2, 4);
        let s_half = schatten_quasi_norm(&x, 0.5).unwrap();
        let base = crate::matrix::thin_svd(&x).unwrap();
        let d = 4;
        let roots: Vec<f64> = base.singulars[..d].iter().map(|&s| s.sqrt()).collect();
        let u0 = DenseMatrix::from_fn(5, d, |i, j| base.left.get(i, j) * roots[j]);
        let v0 = DenseMatrix::from_fn(5, d, |i, j| base.right.get(i, j) * roots[j]);
        let mut r = rng::seeded(99);
        for _ in 0..100 {
            let q1 = rng::random_orthogonal(d, &mut r);
            let q2 = rng::random_orthogonal(d, &mut r);
            let scales: Vec<f64> = (0..d).map(|_| r.random_range(0.5..2.0)).collect();
            let inv: Vec<f64> = scales.iter().map(|s| 1.0 / s).collect();
            let g = q1.scale_cols(&scales).matmul(&q2.transpose());
            let g_inv_t = q1.scale_cols(&inv).matmul(&q2.transpose());
            let fp = FactorPair::new(u0.matmul(&g), v0.matmul(&g_inv_t)).unwrap();
            // Sanity: still a factorization of x.
            assert!(fp.product().sub(&x).frobenius_norm() < 1e-8);
            assert!(bi_trace_surrogate(&fp).unwrap() >= s_half - 1e-8);
        }
    }

    #[test]
    fn chain_is_ordered_with_rank_caps() {
        // Rank 1 collapses the whole chain to a single value.
        let rank1 = seeded_low_rank(4, 5, 1, 31);
        let c = quasi_norm_chain(&rank1).unwrap();
        assert_eq!(c.numerical_rank, 1);
        assert!((c.trace - c.bi_trace).abs() < 1e-8 * c.trace);
        assert!((c.bi_trace - c.tri_trace).abs() < 1e-8 * c.trace);
        assert!((c.rank_bound - c.trace).abs() < 1e-8 * c.trace);

        // diag(4, 1): chain (5, 9, ~17.32, 20); the tri-trace value is
        // (4^(1/3) + 1)^3, not 27.
        let d41 = DenseMatrix::diag(&[4.0, 1.0]);
        let c = quasi_norm_chain(&d41).unwrap();
        let expected_tri = (4f64.cbrt() + 1.0).powi(3);
        assert!((expected_tri - 17.32).abs() < 5e-3);
        assert!((c.trace - 5.0).abs() < 1e-10);
        assert!((c.bi_trace - 9.0).abs() < 1e-10);
        assert!((c.tri_trace - expected_tri).abs() < 1e-10);
        assert!((c.rank_bound - 20.0).abs() < 1e-10);
        assert!(c.bi_trace <= c.numerical_rank as f64 * c.trace + 1e-10);

        // Full chain with slack on a seeded rank-3 instance.
        let x = seeded_low_rank(10, 10, 3, 5);
        let c = quasi_norm_chain(&x).unwrap();
        assert_eq!(c.numerical_rank, 3);
        let tol = 1e-8 * (1.0 + c.tri_trace);
        assert!(c.trace <= c.bi_trace + tol);
        assert!(c.bi_trace <= c.tri_trace + tol);
        assert!(c.tri_trace <= c.rank_bound + tol);
        assert!(c.bi_trace <= 3.0 * c.trace + tol);
    }

    #[test]
    fn unitary_invariance_and_homogeneity() {
        let x = seeded_low_rank(6, 5, 2, 77);
        let p = random_orthogonal(6, 1);
        let q = random_orthogonal(5, 2);
        let rotated = p.matmul(&x).matmul(&q.transpose());
        let (a, b) = (bi_trace(&x).unwrap(), bi_trace(&rotated).unwrap());
        assert!((a - b).abs() <= 1e-8 * (1.0 + a));
        let (a3, b3) = (tri_trace(&x).unwrap(), tri_trace(&rotated).unwrap());
        assert!((a3 - b3).abs() <= 1e-8 * (1.0 + a3));

        for &scale in &[-3.5f64, 0.25, 11.0] {
            let scaled = x.scale(scale);
            let got = bi_trace(&scaled).unwrap();
            let want = scale.abs() * bi_trace(&x).unwrap();
            assert!((got - want).abs() <= 1e-10 * (1.0 + want));
        }
    }

    proptest::proptest! {
        #[test]
        fn schatten_interpolates_between_trace_and_frobenius(seed in 0u64..500) {
            let x = seeded_matrix(4, 4, seed);
            let fr = fro_norm(&x);
            let tr = trace_norm(&x).unwrap();
            let half = schatten_quasi_norm(&x, 0.5).unwrap();
            // ||X||_F <= ||X||_tr <= ||X||_{S_1/2}: smaller p penalizes more.
            proptest::prop_assert!(fr <= tr * (1.0 + 1e-12));
            proptest::prop_assert!(tr <= half * (1.0 + 1e-12));
        }
    }
}
