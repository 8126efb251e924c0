//! Seeded random generation. Everything that draws randomness in this crate
//! goes through a ChaCha stream keyed by a caller-supplied seed, so any
//! (seed, parameters) pair reproduces bit-identical output on any platform.

use crate::matrix::DenseMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `rows x cols` matrix of i.i.d. standard normal entries, drawn row-major.
pub(crate) fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| standard_normal(rng))
}

/// Random `n x n` orthogonal matrix via QR of a Gaussian matrix.
pub(crate) fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let g = gaussian_matrix(n, n, rng).to_nalgebra();
    let q = g.qr().q();
    DenseMatrix::from_nalgebra(&q)
}
