//! Dense row-major matrices and the thin SVD they all flow through.
//!
//! Every solver in this crate reduces to a handful of dense operations:
//! products against small factor matrices, Frobenius norms, and the thin
//! SVD. `DenseMatrix` keeps row-major `f64` storage and converts to
//! [`nalgebra`]'s column-major layout only at the decomposition boundary.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::fmt::Write as _;
use std::path::Path;

/// Dense real matrix in row-major order. Entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                got: format!("{}", data.len()),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix by evaluating `f(row, col)` at every cell.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Square matrix with `diag` on the diagonal, zero elsewhere.
    pub fn diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    /// Row-major view of the underlying storage.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// One row as a contiguous slice.
    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `self * other`, shapes permitting.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        DenseMatrix::from_nalgebra(&(self.to_nalgebra() * other.to_nalgebra()))
    }

    /// `self * diag(d)`; scales column `j` by `d[j]`.
    pub fn scale_cols(&self, d: &[f64]) -> DenseMatrix {
        assert_eq!(self.cols, d.len());
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * d[j])
    }

    pub fn scale(&self, a: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * a).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Renders the text form: a `rows cols` header line, then one line
    /// per row of whitespace-separated decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.rows, self.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form produced by [`DenseMatrix::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty matrix file".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse().map_err(|_| Error::Parse {
                    line: 1,
                    msg: format!("bad dimension token '{t}'"),
                })
            })
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected 'rows cols', got '{header}'"),
            });
        };
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (idx, line) = lines.next().ok_or(Error::Parse {
                line: r + 2,
                msg: "unexpected end of file".into(),
            })?;
            let mut count = 0;
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad real token '{tok}'"),
                })?;
                data.push(v);
                count += 1;
            }
            if count != cols {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {cols} entries, got {count}"),
                });
            }
        }
        Self::from_row_major(rows, cols, data)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text)
    }
}

/// Thin SVD `M = left * diag(singulars) * right^T` with
/// `k = min(rows, cols)` columns in each factor.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `m x k`, orthonormal columns.
    pub left: DenseMatrix,
    /// Non-increasing, non-negative, length `k`.
    pub singulars: Vec<f64>,
    /// `n x k`, orthonormal columns.
    pub right: DenseMatrix,
}

impl SvdResult {
    /// `left * diag(singulars) * right^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.left
            .scale_cols(&self.singulars)
            .matmul(&self.right.transpose())
    }
}

// One-sided Jacobi usually settles in under 15 sweeps; a run that exceeds
// this is genuinely stuck and surfaces as an error.
const JACOBI_MAX_SWEEPS: usize = 100;

// A column pair counts as orthogonal when the normalized inner product
// drops below this.
const JACOBI_TOL: f64 = 1e-14;

/// Full thin SVD of `m`.
///
/// Singular values come back sorted non-increasing; both singular-vector
/// blocks have orthonormal columns. The factor widths in this crate are
/// small, so a complete decomposition is always affordable.
///
/// Implemented as a Householder QR followed by one-sided Jacobi on the
/// triangular factor. Implicit-shift bidiagonal solvers were observed to
/// return silently inaccurate factors on the nearly rank-deficient iterates
/// the solvers produce; the Jacobi route keeps every decomposition accurate
/// to rounding regardless of rank.
pub fn thin_svd(m: &DenseMatrix) -> Result<SvdResult> {
    if m.rows() < m.cols() {
        let t = thin_svd(&m.transpose())?;
        return Ok(SvdResult {
            left: t.right,
            singulars: t.singulars,
            right: t.left,
        });
    }
    let (q, r) = m.to_nalgebra().qr().unpack();
    let (u_small, singulars, right) = jacobi_svd_square(&r).ok_or(Error::SvdFailure {
        rows: m.rows(),
        cols: m.cols(),
    })?;
    let left = DenseMatrix::from_nalgebra(&(q * u_small.to_nalgebra()));
    Ok(SvdResult {
        left,
        singulars,
        right,
    })
}

/// One-sided Jacobi SVD of a square matrix: rotates column pairs until all
/// are mutually orthogonal, then reads singular values off the column norms.
/// Returns `(U, sigma, V)` with `A = U diag(sigma) V^T`, sigma sorted
/// non-increasing, or `None` if the sweep limit is hit.
fn jacobi_svd_square(a: &DMatrix<f64>) -> Option<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    // Column-major working copies of A and the accumulated rotations V.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    // Columns this far (squared) below the dominant one are rounding noise;
    // rotating them against each other cycles forever without converging.
    let zero2 = {
        let top2 = w
            .iter()
            .map(|col| col.iter().map(|x| x * x).sum::<f64>())
            .fold(0.0f64, f64::max);
        top2 * (n as f64 * f64::EPSILON).powi(2)
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (&w[p], &w[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..n {
                        alpha += wp[i] * wp[i];
                        beta += wq[i] * wq[i];
                        gamma += wp[i] * wq[i];
                    }
                    (alpha, beta, gamma)
                };
                if alpha <= zero2 || beta <= zero2 {
                    continue;
                }
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = w.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }

    // Singular values are the column norms; sort descending.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut left_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut singulars = Vec::with_capacity(n);
    let mut degenerate = Vec::new();
    for (slot, &idx) in order.iter().enumerate() {
        let s = norms[idx];
        // Columns the sweeps deflated as rounding noise carry no usable
        // direction; fill them in afterwards with an orthonormal completion.
        if s * s > zero2 && s > f64::MIN_POSITIVE {
            singulars.push(s);
            left_cols.push(w[idx].iter().map(|x| x / s).collect());
        } else {
            singulars.push(0.0);
            left_cols.push(vec![0.0; n]);
            degenerate.push(slot);
        }
    }
    for slot in degenerate {
        complete_orthonormal(&mut left_cols, slot);
    }

    let left = DenseMatrix::from_fn(n, n, |i, j| left_cols[j][i]);
    let right = DenseMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    Some((left, singulars, right))
}

fn rotate(p: &mut [f64], q: &mut [f64], c: f64, s: f64) {
    for i in 0..p.len() {
        let (a, b) = (p[i], q[i]);
        p[i] = c * a - s * b;
        q[i] = s * a + c * b;
    }
}

/// Replaces the zero column at `slot` with a unit vector orthogonal to all
/// other columns, chosen deterministically from the standard basis.
fn complete_orthonormal(cols: &mut [Vec<f64>], slot: usize) {
    let n = cols[0].len();
    for basis in 0..n {
        let mut candidate = vec![0.0; n];
        candidate[basis] = 1.0;
        for (j, col) in cols.iter().enumerate() {
            if j == slot {
                continue;
            }
            let dot: f64 = candidate.iter().zip(col).map(|(a, b)| a * b).sum();
            for (c, u) in candidate.iter_mut().zip(col) {
                *c -= dot * u;
            }
        }
        let norm: f64 = candidate.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            for c in &mut candidate {
                *c /= norm;
            }
            cols[slot] = candidate;
            return;
        }
    }
    unreachable!("an orthonormal completion always exists for a deficient set");
}

/// Largest singular value of `m`.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    let svd = thin_svd(m)?;
    Ok(svd.singulars.first().copied().unwrap_or(0.0))
}
