//! Dense column-major matrices and vectors.
//!
//! Everything in this workspace runs on plain `f64` storage. Matrices are
//! column-major so that factor columns are contiguous slices: the rank-one
//! residue updates touch columns exclusively, and column views must be free.
//!
//! Shapes are checked on the public operations; all accumulations are in
//! double precision.

use crate::error::{Error, Result};
use std::ops::{Index, IndexMut};

/// Denominator substituted for exact zeros in [`DenseMatrix::hadamard_div`].
///
/// The multiplicative update rule divides by products that can reach zero
/// exactly; substituting a small constant keeps the iteration NaN-free while
/// leaving its fixed points (including the non-stationary ones it is known
/// to get stuck in) observable.
pub const EPS_DIV: f64 = 1e-12;

/// Dense matrix, column-major: entry `(i, j)` lives at `data[j * rows + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from a closure over `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from column-major data. Validates length and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArg {
                msg: format!(
                    "data length {} does not match {rows}x{cols}",
                    data.len()
                ),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { what: "matrix data" });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Build from rows given in row-major order (test and I/O convenience).
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        DenseMatrix::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Contiguous view of column `j`.
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        debug_assert_eq!(v.len(), self.rows);
        self.col_mut(j).copy_from_slice(v);
    }

    pub fn row_copy(&self, i: usize) -> DenseVector {
        DenseVector::from_iter((0..self.cols).map(|j| self[(i, j)]))
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == 0.0 {
                    continue;
                }
                let a_col = self.col(k);
                for (o, &a) in out_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^T * other` without forming the transpose.
    pub fn matmul_t_left(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul_t_left",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let b_col = other.col(j);
            for i in 0..self.cols {
                out[(i, j)] = dot(self.col(i), b_col);
            }
        }
        Ok(out)
    }

    /// `self * other^T` without forming the transpose.
    pub fn matmul_t_right(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                op: "matmul_t_right",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.rows);
        for k in 0..self.cols {
            let a_col = self.col(k);
            let b_col = other.col(k);
            for j in 0..other.rows {
                let b = b_col[j];
                if b == 0.0 {
                    continue;
                }
                let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
                for (o, &a) in out_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Gram matrix `self^T * self`.
    pub fn gram(&self) -> DenseMatrix {
        self.matmul_t_left(self).expect("same operand")
    }

    /// `self * x`.
    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        debug_assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (k, &xv) in x.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(k)) {
                *o += a * xv;
            }
        }
        DenseVector(out)
    }

    /// `self^T * x`.
    pub fn matvec_t(&self, x: &[f64]) -> DenseVector {
        debug_assert_eq!(x.len(), self.rows);
        DenseVector::from_iter((0..self.cols).map(|j| dot(self.col(j), x)))
    }

    /// Frobenius inner product `sum_ij self_ij other_ij`.
    pub fn frobenius_inner(&self, other: &DenseMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op: "frobenius_inner",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm_fro_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn norm_fro(&self) -> f64 {
        self.norm_fro_sq().sqrt()
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, "hadamard", |a, b| a * b)
    }

    /// Elementwise quotient with the zero-denominator guard [`EPS_DIV`].
    pub fn hadamard_div(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, "hadamard_div", |a, b| {
            if b == 0.0 {
                a / EPS_DIV
            } else {
                a / b
            }
        })
    }

    fn zip_with(
        &self,
        other: &DenseMatrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Elementwise `max(entry, 0)`.
    pub fn project_nonneg(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x.max(0.0)).collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= 0.0)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// Dense vector backed by a `Vec<f64>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(pub Vec<f64>);

impl DenseVector {
    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn from_slice(s: &[f64]) -> Self {
        DenseVector(s.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm2_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm2(&self) -> f64 {
        self.norm2_sq().sqrt()
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn project_nonneg(&self) -> DenseVector {
        DenseVector(self.0.iter().map(|&x| x.max(0.0)).collect())
    }

    pub fn scale(&self, s: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|&x| x * s).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

impl FromIterator<f64> for DenseVector {
    fn from_iter<T: IntoIterator<Item = f64>>(it: T) -> Self {
        DenseVector(it.into_iter().collect())
    }
}

impl std::ops::Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Dot product of two equal-length slices.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Squared Euclidean norm of a slice.
#[inline]
pub fn norm2_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Euclidean norm of a slice.
#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    norm2_sq(a).sqrt()
}
