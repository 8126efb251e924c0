//! Factorization state: the small matrices the solvers actually update.

use crate::error::{Error, Result};
use crate::matrix::{thin_svd, DenseMatrix};
use crate::observations::ObservationSet;
use crate::rng;

/// Two-factor state `X = U V^T` with shared inner rank `d`.
#[derive(Debug, Clone)]
pub struct FactorPair {
    /// `m x d`.
    pub u: DenseMatrix,
    /// `n x d`.
    pub v: DenseMatrix,
}

impl FactorPair {
    pub fn new(u: DenseMatrix, v: DenseMatrix) -> Result<Self> {
        if u.cols() != v.cols() || u.cols() == 0 {
            return Err(Error::DimensionMismatch {
                expected: "factors with equal positive inner rank".into(),
                got: format!("{}x{} and {}x{}", u.rows(), u.cols(), v.rows(), v.cols()),
            });
        }
        Ok(Self { u, v })
    }

    pub fn inner_rank(&self) -> usize {
        self.u.cols()
    }

    /// The represented matrix `U V^T`.
    pub fn product(&self) -> DenseMatrix {
        self.u.matmul(&self.v.transpose())
    }

    /// `||[U, V] - [other.U, other.V]||_F`.
    pub fn distance(&self, other: &FactorPair) -> f64 {
        let du = self.u.sub(&other.u).frobenius_norm();
        let dv = self.v.sub(&other.v).frobenius_norm();
        du.hypot(dv)
    }

    /// `||[U, V]||_F`.
    pub fn norm(&self) -> f64 {
        self.u.frobenius_norm().hypot(self.v.frobenius_norm())
    }
}

/// Three-factor state `X = U V W^T`; `V` is the square `d x d` core.
#[derive(Debug, Clone)]
pub struct FactorTriple {
    /// `m x d`.
    pub u: DenseMatrix,
    /// `d x d`.
    pub v: DenseMatrix,
    /// `n x d`.
    pub w: DenseMatrix,
}

impl FactorTriple {
    pub fn new(u: DenseMatrix, v: DenseMatrix, w: DenseMatrix) -> Result<Self> {
        let d = u.cols();
        if d == 0 || v.rows() != d || v.cols() != d || w.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: "U: m x d, V: d x d, W: n x d".into(),
                got: format!(
                    "{}x{}, {}x{}, {}x{}",
                    u.rows(),
                    u.cols(),
                    v.rows(),
                    v.cols(),
                    w.rows(),
                    w.cols()
                ),
            });
        }
        Ok(Self { u, v, w })
    }

    pub fn inner_rank(&self) -> usize {
        self.u.cols()
    }

    /// The represented matrix `U V W^T`.
    pub fn product(&self) -> DenseMatrix {
        self.u.matmul(&self.v).matmul(&self.w.transpose())
    }

    pub fn distance(&self, other: &FactorTriple) -> f64 {
        let du = self.u.sub(&other.u).frobenius_norm();
        let dv = self.v.sub(&other.v).frobenius_norm();
        let dw = self.w.sub(&other.w).frobenius_norm();
        (du * du + dv * dv + dw * dw).sqrt()
    }

    pub fn norm(&self) -> f64 {
        let (u, v, w) = (
            self.u.frobenius_norm(),
            self.v.frobenius_norm(),
            self.w.frobenius_norm(),
        );
        (u * u + v * v + w * w).sqrt()
    }
}

/// Either factorization shape, as carried by a solver result.
#[derive(Debug, Clone)]
pub enum Factors {
    Pair(FactorPair),
    Triple(FactorTriple),
}

impl Factors {
    /// The represented dense matrix.
    pub fn product(&self) -> DenseMatrix {
        match self {
            Factors::Pair(fp) => fp.product(),
            Factors::Triple(ft) => ft.product(),
        }
    }

    pub fn as_pair(&self) -> Option<&FactorPair> {
        match self {
            Factors::Pair(fp) => Some(fp),
            Factors::Triple(_) => None,
        }
    }

    pub fn as_triple(&self) -> Option<&FactorTriple> {
        match self {
            Factors::Triple(ft) => Some(ft),
            Factors::Pair(_) => None,
        }
    }
}

/// How a solver builds its starting factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// I.i.d. standard normal entries scaled by `(||b||_2 / |Omega|)^(1/2)`
    /// (cube root for triples). Suited to runs where the observed matrix is
    /// corrupted and its spectrum is unreliable.
    GaussianScaled,
    /// Top-`d` SVD factors of the zero-filled observed matrix, each scaled
    /// by the matching root of the singular values. Reconstructs the data
    /// exactly when it is fully observed with rank at most `d`.
    SpectralWarm,
}

fn check_inner_rank(obs: &ObservationSet, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("inner rank must be positive".into()));
    }
    if d > obs.host_rows().min(obs.host_cols()) {
        return Err(Error::InvalidArgument(format!(
            "inner rank {d} exceeds min host dimension {}",
            obs.host_rows().min(obs.host_cols())
        )));
    }
    Ok(())
}

/// Starting `(U, V)` for a two-factor solve over `obs`.
pub fn init_factors(obs: &ObservationSet, d: usize, seed: u64, mode: InitMode) -> Result<FactorPair> {
    check_inner_rank(obs, d)?;
    let (m, n) = (obs.host_rows(), obs.host_cols());
    match mode {
        InitMode::GaussianScaled => {
            let scale = (obs.values_norm() / obs.len().max(1) as f64).sqrt();
            let mut r = rng::seeded(seed);
            let u = rng::gaussian_matrix(m, d, &mut r).scale(scale);
            let v = rng::gaussian_matrix(n, d, &mut r).scale(scale);
            FactorPair::new(u, v)
        }
        InitMode::SpectralWarm => {
            let svd = thin_svd(&obs.to_dense())?;
            let roots: Vec<f64> = svd.singulars[..d].iter().map(|&s| s.sqrt()).collect();
            let u = truncate_cols(&svd.left, d).scale_cols(&roots);
            let v = truncate_cols(&svd.right, d).scale_cols(&roots);
            FactorPair::new(u, v)
        }
    }
}

/// Starting `(U, V, W)` for a three-factor solve over `obs`.
pub fn init_factor_triple(
    obs: &ObservationSet,
    d: usize,
    seed: u64,
    mode: InitMode,
) -> Result<FactorTriple> {
    check_inner_rank(obs, d)?;
    let (m, n) = (obs.host_rows(), obs.host_cols());
    match mode {
        InitMode::GaussianScaled => {
            let scale = (obs.values_norm() / obs.len().max(1) as f64).cbrt();
            let mut r = rng::seeded(seed);
            let u = rng::gaussian_matrix(m, d, &mut r).scale(scale);
            let v = rng::gaussian_matrix(d, d, &mut r).scale(scale);
            let w = rng::gaussian_matrix(n, d, &mut r).scale(scale);
            FactorTriple::new(u, v, w)
        }
        InitMode::SpectralWarm => {
            let svd = thin_svd(&obs.to_dense())?;
            let roots: Vec<f64> = svd.singulars[..d].iter().map(|&s| s.cbrt()).collect();
            let u = truncate_cols(&svd.left, d).scale_cols(&roots);
            let v = DenseMatrix::diag(&roots);
            let w = truncate_cols(&svd.right, d).scale_cols(&roots);
            FactorTriple::new(u, v, w)
        }
    }
}

fn truncate_cols(m: &DenseMatrix, d: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m.rows(), d, |i, j| m.get(i, j))
}
