//! Shared helpers for unit tests.

use crate::matrix::{spectral_norm, DenseMatrix};
use crate::observations::ObservationSet;
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;

/// Matrix of i.i.d. standard normal entries from a fixed seed.
pub fn seeded_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut r = rng::seeded(seed);
    rng::gaussian_matrix(rows, cols, &mut r)
}

/// Observation set over random distinct cells with smooth synthetic values.
pub fn seeded_observations(rows: usize, cols: usize, count: usize, seed: u64) -> ObservationSet {
    let mut r = rng::seeded(seed);
    let mut cells: Vec<usize> = (0..rows * cols).collect();
    cells.shuffle(&mut r);
    let entries = cells[..count]
        .iter()
        .map(|&c| (c / cols, c % cols, r.random_range(-2.0..2.0)))
        .collect();
    ObservationSet::new(rows, cols, entries).unwrap()
}

/// Rank-`r` product of two seeded Gaussian factors.
pub fn seeded_low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> DenseMatrix {
    let mut r = rng::seeded(seed);
    let p = rng::gaussian_matrix(rows, rank, &mut r);
    let q = rng::gaussian_matrix(cols, rank, &mut r);
    p.matmul(&q.transpose())
}

pub fn random_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    let mut r = rng::seeded(seed);
    rng::random_orthogonal(n, &mut r)
}

/// Spectral norm of `M^T M - I`: how far `M`'s columns are from orthonormal.
pub fn orthonormality_residual(m: &DenseMatrix) -> f64 {
    let gram = m.transpose().matmul(m);
    let dev = gram.sub(&DenseMatrix::identity(m.cols()));
    spectral_norm(&dev).unwrap()
}
