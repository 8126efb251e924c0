//! Sparse observation sets: the measurement side of matrix completion.
//!
//! An [`ObservationSet`] is a set of `(row, col, value)` triples over a host
//! matrix. It realizes the sampling operator: [`ObservationSet::project`]
//! reads a dense matrix at the observed cells ("A(X)"), and
//! [`ObservationSet::scatter`] is the adjoint that places a vector of values
//! back into an otherwise-zero dense matrix ("A*(v)"). Entries are kept in
//! canonical row-major order so the flattened value vector is identical
//! across runs and platforms.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use std::fmt::Write as _;
use std::path::Path;

/// Observed entries of a partially known matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    host_rows: usize,
    host_cols: usize,
    /// Sorted row-major; unique `(row, col)` pairs; finite values.
    entries: Vec<(usize, usize, f64)>,
}

impl ObservationSet {
    /// Validates and canonicalizes a list of observations.
    ///
    /// Duplicate cells are rejected rather than merged: silently collapsing
    /// them would change every downstream error denominator.
    pub fn new(
        host_rows: usize,
        host_cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if host_rows == 0 || host_cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "host dimensions must be positive, got {host_rows}x{host_cols}"
            )));
        }
        for &(row, col, value) in &entries {
            if row >= host_rows || col >= host_cols {
                return Err(Error::IndexOutOfRange {
                    row,
                    col,
                    rows: host_rows,
                    cols: host_cols,
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFinite(row * host_cols + col));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        for pair in entries.windows(2) {
            if (pair[0].0, pair[0].1) == (pair[1].0, pair[1].1) {
                return Err(Error::DuplicateEntry {
                    row: pair[0].0,
                    col: pair[0].1,
                });
            }
        }
        Ok(Self {
            host_rows,
            host_cols,
            entries,
        })
    }

    pub fn host_rows(&self) -> usize {
        self.host_rows
    }

    pub fn host_cols(&self) -> usize {
        self.host_cols
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in canonical (row-major) order.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// The observed values in canonical order: the measurement vector `b`.
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|&(_, _, v)| v).collect()
    }

    /// Euclidean norm of the observed value vector.
    pub fn values_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, _, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Dense host-sized matrix with observed values filled in, zero elsewhere.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.host_rows, self.host_cols);
        for &(i, j, v) in &self.entries {
            m.set(i, j, v);
        }
        m
    }

    /// Reads `m` at the observed cells, in canonical order.
    ///
    /// The set acts as a mask here; `m` need not be host-sized, but every
    /// observed index must fall inside it.
    pub fn project(&self, m: &DenseMatrix) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.entries.len());
        for &(i, j, _) in &self.entries {
            if i >= m.rows() || j >= m.cols() {
                return Err(Error::IndexOutOfRange {
                    row: i,
                    col: j,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            out.push(m.get(i, j));
        }
        Ok(out)
    }

    /// Adjoint of [`project`](Self::project): places `values` (canonical
    /// order) into a zero host-sized matrix.
    pub fn scatter(&self, values: &[f64]) -> Result<DenseMatrix> {
        if values.len() != self.entries.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values", self.entries.len()),
                got: format!("{}", values.len()),
            });
        }
        let mut m = DenseMatrix::zeros(self.host_rows, self.host_cols);
        for (&(i, j, _), &v) in self.entries.iter().zip(values) {
            m.set(i, j, v);
        }
        Ok(m)
    }

    /// `A*(values) * rhs` without materializing the scattered matrix.
    ///
    /// `rhs` must have `host_cols` rows; the result is `host_rows x rhs.cols()`.
    pub fn scatter_times(&self, values: &[f64], rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(values.len(), self.entries.len());
        assert_eq!(rhs.rows(), self.host_cols);
        let d = rhs.cols();
        let mut out = vec![0.0; self.host_rows * d];
        for (&(i, j, _), &v) in self.entries.iter().zip(values) {
            let row = rhs.row(j);
            let dst = &mut out[i * d..(i + 1) * d];
            for (o, r) in dst.iter_mut().zip(row) {
                *o += v * r;
            }
        }
        DenseMatrix::from_row_major(self.host_rows, d, out).expect("finite accumulation")
    }

    /// `A*(values)^T * rhs` without materializing the scattered matrix.
    ///
    /// `rhs` must have `host_rows` rows; the result is `host_cols x rhs.cols()`.
    pub fn scatter_transpose_times(&self, values: &[f64], rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(values.len(), self.entries.len());
        assert_eq!(rhs.rows(), self.host_rows);
        let d = rhs.cols();
        let mut out = vec![0.0; self.host_cols * d];
        for (&(i, j, _), &v) in self.entries.iter().zip(values) {
            let row = rhs.row(i);
            let dst = &mut out[j * d..(j + 1) * d];
            for (o, r) in dst.iter_mut().zip(row) {
                *o += v * r;
            }
        }
        DenseMatrix::from_row_major(self.host_cols, d, out).expect("finite accumulation")
    }

    /// `A(U V^T)` evaluated only at the observed cells.
    pub fn project_pair(&self, u: &DenseMatrix, v: &DenseMatrix) -> Vec<f64> {
        assert_eq!(u.rows(), self.host_rows);
        assert_eq!(v.rows(), self.host_cols);
        assert_eq!(u.cols(), v.cols());
        self.entries
            .iter()
            .map(|&(i, j, _)| dot(u.row(i), v.row(j)))
            .collect()
    }

    /// `A(U V W^T)` evaluated only at the observed cells.
    pub fn project_triple(&self, u: &DenseMatrix, v: &DenseMatrix, w: &DenseMatrix) -> Vec<f64> {
        // U V W^T = U Z^T with Z = W V^T.
        let z = w.matmul(&v.transpose());
        self.project_pair(u, &z)
    }

    /// Renders the text form: `rows cols count`, then `i j value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.host_rows,
            self.host_cols,
            self.entries.len()
        );
        for &(i, j, v) in &self.entries {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }

    /// Parses the text form produced by [`ObservationSet::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty observation file".into(),
        })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let [rows, cols, count] = head[..] else {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected 'rows cols count', got '{header}'"),
            });
        };
        let parse_usize = |tok: &str, line: usize| -> Result<usize> {
            tok.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad integer token '{tok}'"),
            })
        };
        let rows = parse_usize(rows, 1)?;
        let cols = parse_usize(cols, 1)?;
        let count = parse_usize(count, 1)?;
        let mut entries = Vec::with_capacity(count);
        for k in 0..count {
            let (idx, line) = lines.next().ok_or(Error::Parse {
                line: k + 2,
                msg: "unexpected end of file".into(),
            })?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [i, j, v] = toks[..] else {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected 'i j value', got '{line}'"),
                });
            };
            let value: f64 = v.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("bad real token '{v}'"),
            })?;
            entries.push((parse_usize(i, idx + 1)?, parse_usize(j, idx + 1)?, value));
        }
        Self::new(rows, cols, entries)
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

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
