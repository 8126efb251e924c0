//! Low-rank matrix recovery through factored Schatten quasi-norm penalties.
//!
//! The Schatten-1/2 and Schatten-1/3 quasi-norms of a matrix can be written
//! as minima of factor trace norms over two- and three-term factorizations
//! (`X = U V^T`, `X = U V W^T`). That turns quasi-norm-penalized recovery
//! into problems over small factor matrices, solved here by two alternating
//! schemes:
//!
//! * [`solvers::palm_bitr_mc`] / [`solvers::palm_tritr_mc`] for matrix
//!   completion with a squared loss,
//! * [`solvers::ladm_bitr`] / [`solvers::ladm_tritr`] for robust recovery
//!   with `l1` or `l1/2` losses under an augmented Lagrangian.
//!
//! [`norms`] evaluates the quasi-norms both ways (factored and direct) and
//! [`certify`] checks the identities numerically; [`data`] generates
//! synthetic instances and ingests ratings files; [`metrics`] scores
//! recoveries. A companion binary crate exposes all of it as an experiment
//! harness.
//!
//! See the guide chapters (in `book/`, mirrored under [`guide`]) for worked
//! examples; their code blocks compile and run as doctests.

pub mod certify;
pub mod data;
pub mod error;
pub mod factors;
pub mod matrix;
pub mod metrics;
pub mod norms;
pub mod observations;
pub mod prox;
pub mod solvers;

mod rng;

#[cfg(test)]
pub(crate) mod testutil;

pub mod guide;

pub use error::{Error, Result};
pub use factors::{FactorPair, FactorTriple, Factors, InitMode};
pub use matrix::{spectral_norm, thin_svd, DenseMatrix, SvdResult};
pub use observations::ObservationSet;
