//! The three proximal operators every solver step reduces to.
//!
//! * [`svt`] — singular value thresholding, the proximal map of the trace
//!   norm: shrink every singular value by `tau` and clamp at zero.
//! * [`soft_threshold`] — the proximal map of the scaled `l1` norm.
//! * [`half_threshold`] — the closed-form minimizer of
//!   `(y - x)^2 + lambda * |x|^(1/2)`, a cosine-form shrinkage with a hard
//!   cutoff below `(54^(1/3) / 4) * lambda^(2/3)`.

use crate::error::{Error, Result};
use crate::matrix::{thin_svd, DenseMatrix};

/// Matrix shrinkage operator: the exact minimizer of
/// `tau * ||X||_tr + 1/2 * ||X - m||_F^2`.
pub fn svt(m: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    if tau < 0.0 || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "svt threshold must be non-negative, got {tau}"
        )));
    }
    let svd = thin_svd(m)?;
    let shrunk: Vec<f64> = svd.singulars.iter().map(|&s| (s - tau).max(0.0)).collect();
    Ok(svd
        .left
        .scale_cols(&shrunk)
        .matmul(&svd.right.transpose()))
}

/// Componentwise `sign(y) * max(|y| - tau, 0)`: the exact minimizer of
/// `tau * ||x||_1 + 1/2 * ||x - y||_2^2`.
pub fn soft_threshold(y: &[f64], tau: f64) -> Result<Vec<f64>> {
    if tau < 0.0 || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "soft threshold must be non-negative, got {tau}"
        )));
    }
    Ok(y.iter().map(|&v| soft_threshold_scalar(v, tau)).collect())
}

#[inline]
pub fn soft_threshold_scalar(y: f64, tau: f64) -> f64 {
    y.signum() * (y.abs() - tau).max(0.0)
}

/// Cutoff below which the half-threshold returns zero.
pub fn half_threshold_cutoff(lambda: f64) -> f64 {
    54f64.cbrt() / 4.0 * lambda.powf(2.0 / 3.0)
}

/// Minimizer of `(y - x)^2 + lambda * |x|^(1/2)`.
///
/// Returns zero when `|y|` does not exceed the cutoff (ties resolve to
/// zero); otherwise the cosine-form shrinkage
/// `2/3 * y * (1 + cos(2*pi/3 - 2/3 * phi))` with
/// `phi = arccos(lambda/8 * (|y|/3)^(-3/2))`.
pub fn half_threshold(y: f64, lambda: f64) -> Result<f64> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "half threshold scale must be positive, got {lambda}"
        )));
    }
    if y.abs() <= half_threshold_cutoff(lambda) {
        return Ok(0.0);
    }
    // Above the cutoff the arccos argument lies in (0, sqrt(2)/2]; the
    // clamp only absorbs rounding at the boundary.
    let arg = (lambda / 8.0 * (y.abs() / 3.0).powf(-1.5)).clamp(-1.0, 1.0);
    let phi = arg.acos();
    Ok(2.0 / 3.0 * y * (1.0 + (2.0 * std::f64::consts::PI / 3.0 - 2.0 * phi / 3.0).cos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::thin_svd;
    use crate::norms::trace_norm;
    use crate::rng;
    use crate::testutil::seeded_matrix;
    use rand::Rng;

    /// Exhaustive lattice minimization of `f` over `[lo, hi]` with the given
    /// step, refined in two stages so wide ranges stay affordable. The
    /// refinement windows cover every coarse local basin, so the result is
    /// the same lattice point full enumeration would find.
    pub(crate) fn grid_minimize(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
        let coarse = step.max((hi - lo) / 40_000.0);
        let n = ((hi - lo) / coarse).round() as usize;
        let mut candidates: Vec<(f64, f64)> = (0..=n)
            .map(|k| {
                let x = lo + k as f64 * coarse;
                (f(x), x)
            })
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = (f64::INFINITY, 0.0);
        for &(_, center) in candidates.iter().take(4) {
            let wlo = (center - 2.0 * coarse).max(lo);
            let whi = (center + 2.0 * coarse).min(hi);
            // Stay on the global lattice anchored at `lo`.
            let start = ((wlo - lo) / step).ceil() as usize;
            let stop = ((whi - lo) / step).floor() as usize;
            for k in start..=stop {
                let x = lo + k as f64 * step;
                let v = f(x);
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        best.1
    }

    #[test]
    fn soft_threshold_analytic_cases() {
        assert_eq!(soft_threshold_scalar(0.0, 2.0), 0.0);
        assert_eq!(soft_threshold_scalar(5.0, 2.0), 3.0);
        assert_eq!(soft_threshold_scalar(-5.0, 2.0), -3.0);
        assert!(soft_threshold(&[1.0], -0.1).is_err());
    }

    #[test]
    fn soft_threshold_matches_grid_oracle() {
        // min over x of 0.4|x| + 1/2 (x - 1.3)^2 on [-3, 3], step 1e-6.
        let oracle = grid_minimize(
            |x| 0.4 * x.abs() + 0.5 * (x - 1.3) * (x - 1.3),
            -3.0,
            3.0,
            1e-6,
        );
        let got = soft_threshold_scalar(1.3, 0.4);
        assert!((got - oracle).abs() < 1e-5, "{got} vs oracle {oracle}");
    }

    #[test]
    fn half_threshold_trivial_branches() {
        assert_eq!(half_threshold(0.0, 1.0).unwrap(), 0.0);
        // 0.5 is below the cutoff 54^(1/3)/4 ~ 0.94494.
        assert_eq!(half_threshold(0.5, 1.0).unwrap(), 0.0);
        assert!(half_threshold(1.0, 0.0).is_err());
        assert!(half_threshold(1.0, -1.0).is_err());
    }

    #[test]
    fn half_threshold_matches_grid_oracle() {
        // min over x of (2 - x)^2 + |x|^(1/2) on [-3, 3], step 1e-6.
        let oracle = grid_minimize(|x| (2.0 - x) * (2.0 - x) + x.abs().sqrt(), -3.0, 3.0, 1e-6);
        let got = half_threshold(2.0, 1.0).unwrap();
        assert!((got - 1.81).abs() < 0.01, "expected near 1.81, got {got}");
        assert!((got - oracle).abs() < 1e-4, "{got} vs oracle {oracle}");
    }

    #[test]
    fn half_threshold_branch_boundary_is_deterministic() {
        for &lambda in &[0.3, 1.0, 4.2] {
            let cutoff = half_threshold_cutoff(lambda);
            assert_eq!(half_threshold(cutoff - 1e-6, lambda).unwrap(), 0.0);
            assert_eq!(half_threshold(cutoff, lambda).unwrap(), 0.0);
            let above = half_threshold(cutoff + 1e-6, lambda).unwrap();
            assert!(above > 0.0);
            // The nonzero branch lands near 2y/3 at the boundary.
            assert!((above - 2.0 * (cutoff + 1e-6) / 3.0).abs() < 1e-3);
        }
    }

    #[test]
    fn scalar_prox_outputs_match_grid_oracles_at_scale() {
        let mut r = rng::seeded(7);
        for case in 0..100 {
            let lambda = r.random_range(0.1..10.0);
            let y: f64 = r.random_range(-10.0..10.0);
            let lo = -y.abs() - 1.0;
            let hi = y.abs() + 1.0;

            let soft_oracle =
                grid_minimize(|x| lambda * x.abs() + 0.5 * (x - y) * (x - y), lo, hi, 1e-6);
            let soft = soft_threshold_scalar(y, lambda);
            assert!(
                (soft - soft_oracle).abs() < 1e-4,
                "case {case}: soft {soft} vs {soft_oracle} (y={y}, lambda={lambda})"
            );

            let half_oracle = grid_minimize(
                |x| (y - x) * (y - x) + lambda * x.abs().sqrt(),
                lo,
                hi,
                1e-6,
            );
            let half = half_threshold(y, lambda).unwrap();
            assert!(
                (half - half_oracle).abs() < 1e-4,
                "case {case}: half {half} vs {half_oracle} (y={y}, lambda={lambda})"
            );
        }
    }

    #[test]
    fn svt_trivial_cases() {
        let m = seeded_matrix(4, 3, 5);
        let same = svt(&m, 0.0).unwrap();
        assert!(same.sub(&m).frobenius_norm() < 1e-10);

        let d = DenseMatrix::diag(&[3.0, 1.0]);
        let out = svt(&d, 2.0).unwrap();
        let expect = DenseMatrix::diag(&[1.0, 0.0]);
        assert!(out.sub(&expect).frobenius_norm() < 1e-12);

        assert!(svt(&m, -1.0).is_err());
    }

    #[test]
    fn svt_output_beats_seeded_perturbations() {
        // Prox objective at the svt output vs 1000 perturbations of radius 1e-2.
        let m = seeded_matrix(4, 4, 77);
        let tau = 0.5;
        let out = svt(&m, tau).unwrap();
        let objective = |x: &DenseMatrix| {
            tau * trace_norm(x).unwrap() + 0.5 * x.sub(&m).frobenius_norm().powi(2)
        };
        let base = objective(&out);
        let mut r = rng::seeded(78);
        for _ in 0..1000 {
            let dir = rng::gaussian_matrix(4, 4, &mut r);
            let radius: f64 = r.random_range(0.0..1e-2);
            let pert = out.add(&dir.scale(radius / dir.frobenius_norm()));
            assert!(objective(&pert) >= base - 1e-12);
        }
    }

    #[test]
    fn svt_shrinks_singular_values_exactly() {
        let m = seeded_matrix(5, 4, 3);
        let tau = 0.8;
        let before = thin_svd(&m).unwrap().singulars;
        let after = thin_svd(&svt(&m, tau).unwrap()).unwrap().singulars;
        for (b, a) in before.iter().zip(&after) {
            assert!((a - (b - tau).max(0.0)).abs() < 1e-10);
        }
    }
}
