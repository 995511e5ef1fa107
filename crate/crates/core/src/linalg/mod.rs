//! Dense matrix container plus the two numerical kernels the rest of the crate
//! is built on: a deterministic truncated SVD and the Moore-Penrose
//! pseudoinverse.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

mod jacobi;

use jacobi::thin_svd;

const SIGN_TIE_TOL: f64 = 1e-12;

/// A dense, finite, real `n x p` matrix with optional row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            values,
            row_labels: None,
            col_labels: None,
        })
    }

    /// Builds a matrix from row slices; all rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        for (i, row) in rows.iter().enumerate() {
            if row.as_ref().len() != p {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {p}",
                    row.as_ref().len()
                )));
            }
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i].as_ref()[j]))
    }

    pub fn with_row_labels(mut self, labels: Vec<String>) -> Result<Self> {
        validate_labels(&labels, self.nrows(), "row")?;
        self.row_labels = Some(labels);
        Ok(self)
    }

    pub fn with_col_labels(mut self, labels: Vec<String>) -> Result<Self> {
        validate_labels(&labels, self.ncols(), "column")?;
        self.col_labels = Some(labels);
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    pub fn transpose(&self) -> Self {
        Self {
            values: self.values.transpose(),
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// Columns at `indices`, in the given order. Labels follow the columns.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        check_index_set(indices, self.ncols(), "column")?;
        Ok(Self {
            values: self.values.select_columns(indices),
            row_labels: self.row_labels.clone(),
            col_labels: self
                .col_labels
                .as_ref()
                .map(|l| indices.iter().map(|&j| l[j].clone()).collect()),
        })
    }

    /// Rows at `indices`, in the given order. Labels follow the rows.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        check_index_set(indices, self.nrows(), "row")?;
        Ok(Self {
            values: self.values.select_rows(indices),
            row_labels: self
                .row_labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
            col_labels: self.col_labels.clone(),
        })
    }

    /// Subtracts each column's mean.
    pub fn center_columns(&self) -> Self {
        let mut values = self.values.clone();
        for mut col in values.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        Self {
            values,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
        }
    }

    /// Stacks `other` below `self`. Row labels are dropped since the two
    /// groups may reuse identifiers.
    pub fn vstack(&self, other: &DataMatrix) -> Result<Self> {
        if self.ncols() != other.ncols() {
            return Err(Error::Dimension(format!(
                "cannot stack matrices with {} and {} columns",
                self.ncols(),
                other.ncols()
            )));
        }
        let n = self.nrows();
        let values = DMatrix::from_fn(n + other.nrows(), self.ncols(), |i, j| {
            if i < n {
                self.values[(i, j)]
            } else {
                other.values[(i - n, j)]
            }
        });
        Ok(Self {
            values,
            row_labels: None,
            col_labels: self.col_labels.clone(),
        })
    }
}

fn check_finite(values: &DMatrix<f64>) -> Result<()> {
    for j in 0..values.ncols() {
        for i in 0..values.nrows() {
            if !values[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn validate_labels(labels: &[String], expected: usize, what: &str) -> Result<()> {
    if labels.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: labels.len(),
        });
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "duplicate {what} label {label:?}"
            )));
        }
    }
    Ok(())
}

/// Checks that `indices` is a non-empty set of distinct positions below `len`.
pub(crate) fn check_index_set(indices: &[usize], len: usize, what: &str) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::Dimension(format!("empty {what} index list")));
    }
    let mut seen = vec![false; len];
    for &i in indices {
        if i >= len {
            return Err(Error::Dimension(format!(
                "{what} index {i} out of range for length {len}"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!(
                "duplicate {what} index {i}"
            )));
        }
    }
    Ok(())
}

/// The leading `k` singular triplets of a matrix.
///
/// Each right vector is oriented so that its entry of largest magnitude is
/// positive (first such entry on ties); the matching left vector is flipped
/// with it. Leverage scores do not depend on this choice but reproducible
/// output does.
///
/// When singular values repeat, the corresponding vectors are only defined up
/// to a rotation of their common subspace, so per-vector quantities are not
/// unique there.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    pub k: usize,
    /// Nonincreasing, nonnegative.
    pub singular_values: DVector<f64>,
    /// `n x k`, orthonormal columns.
    pub left_vectors: DMatrix<f64>,
    /// `p x k`, orthonormal columns.
    pub right_vectors: DMatrix<f64>,
}

impl TruncatedSvd {
    /// `sum_i sigma_i u_i v_i^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.left_vectors.clone();
        for (mut col, &s) in scaled.column_iter_mut().zip(self.singular_values.iter()) {
            col *= s;
        }
        scaled * self.right_vectors.transpose()
    }
}

pub fn truncated_svd(x: &DataMatrix, k: usize) -> Result<TruncatedSvd> {
    let (n, p) = (x.nrows(), x.ncols());
    if k == 0 || k > n.min(p) {
        return Err(Error::Dimension(format!(
            "k = {k} must lie in 1..={} for a {n}x{p} matrix",
            n.min(p)
        )));
    }
    check_finite(x.values())?;
    let svd = thin_svd(x.values())?;
    let mut left = svd.u.columns(0, k).into_owned();
    let mut right = svd.v.columns(0, k).into_owned();
    for t in 0..k {
        let flip = {
            let v = right.column(t);
            v[sign_pivot(v.as_slice())] < 0.0
        };
        if flip {
            right.column_mut(t).neg_mut();
            left.column_mut(t).neg_mut();
        }
    }

    Ok(TruncatedSvd {
        k,
        singular_values: svd.s.rows(0, k).into_owned(),
        left_vectors: left,
        right_vectors: right,
    })
}

/// Index of the largest-magnitude entry of a unit vector. Magnitudes within
/// `SIGN_TIE_TOL` of the maximum count as ties and go to the lowest index.
pub(crate) fn sign_pivot(v: &[f64]) -> usize {
    let max = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    v.iter()
        .position(|x| x.abs() >= max - SIGN_TIE_TOL)
        .unwrap_or(0)
}

/// Default rank cutoff: `max(n, p) * sigma_1 * machine epsilon`.
pub fn default_pinv_tolerance(n: usize, p: usize, sigma_max: f64) -> f64 {
    n.max(p) as f64 * sigma_max * f64::EPSILON
}

/// Moore-Penrose pseudoinverse; singular values `<= tol` are treated as zero.
/// `tol = None` selects [`default_pinv_tolerance`].
pub fn pseudoinverse(a: &DataMatrix, tol: Option<f64>) -> Result<DataMatrix> {
    let inv = pinv(a.values(), tol)?;
    Ok(DataMatrix {
        values: inv,
        row_labels: a.col_labels.clone(),
        col_labels: a.row_labels.clone(),
    })
}

pub(crate) fn pinv(a: &DMatrix<f64>, tol: Option<f64>) -> Result<DMatrix<f64>> {
    if let Some(t) = tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pseudoinverse tolerance must be finite and nonnegative, got {t}"
            )));
        }
    }
    check_finite(a)?;
    let (n, p) = a.shape();
    if n == 1 || p == 1 {
        // A single row or column inverts in closed form as a^T / |a|^2,
        // which stays exact where the rotations of the SVD would not.
        let norm = a.norm();
        let tol = tol.unwrap_or_else(|| default_pinv_tolerance(n, p, norm));
        if norm <= tol {
            return Ok(DMatrix::zeros(p, n));
        }
        return Ok(a.transpose() / a.norm_squared());
    }
    let svd = thin_svd(a)?;
    let sigma_max = svd.s.iter().copied().fold(0.0, f64::max);
    let tol = tol.unwrap_or_else(|| default_pinv_tolerance(n, p, sigma_max));

    // V * diag(1/sigma) * U^T over the retained triplets.
    let mut out = DMatrix::zeros(p, n);
    for (t, &s) in svd.s.iter().enumerate() {
        if s <= tol {
            continue;
        }
        out += (svd.v.column(t) / s) * svd.u.column(t).transpose();
    }
    Ok(out)
}
