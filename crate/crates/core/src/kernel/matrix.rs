use std::fmt;
use std::ops::{Index, Range};

use crate::error::{Error, Result};

/// Dense real matrix in column-major order: entry `(i, j)` lives at
/// `data[i + j * rows]`, so the row index runs fastest.
///
/// Matrices are immutable once handed out; every operation returns a new
/// matrix. Empty shapes (zero rows or columns) are representable because
/// block partitions can legitimately be empty, but [`DenseMatrix::new`]
/// only accepts non-empty, finite data.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data, checking the length and that
    /// every entry is finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(
                "DenseMatrix::new",
                format!("shape {rows}x{cols} has an empty dimension"),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(
                "DenseMatrix::new",
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: k % rows,
                col: k / rows,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices, convenient for small literals.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::contract("DenseMatrix::from_rows", "ragged rows"));
        }
        let mut data = vec![0.0; nrows * ncols];
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                data[i + j * nrows] = x;
            }
        }
        Self::new(nrows, ncols, data)
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_vec_unchecked(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    /// Square diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i + i * n] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_vec_unchecked(rows, cols, data)
    }

    /// Single-column matrix.
    pub fn column(values: &[f64]) -> Self {
        Self::from_vec_unchecked(values.len(), 1, values.to_vec())
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    /// Column-major backing slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row + col * self.rows]
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub(crate) fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable views of two distinct columns.
    pub(crate) fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        assert!(p < q);
        let rows = self.rows;
        let (left, right) = self.data.split_at_mut(q * rows);
        (&mut left[p * rows..(p + 1) * rows], &mut right[..rows])
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row + col * self.rows] = value;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for (i, &x) in self.col(j).iter().enumerate() {
                t.data[j + i * self.cols] = x;
            }
        }
        t
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                "matmul",
                format!("rhs with {} rows", self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b != 0.0 {
                    axpy(b, self.col(k), dst);
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ * rhs` without forming the transpose.
    pub fn tr_matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::shape(
                "tr_matmul",
                format!("rhs with {} rows", self.rows),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        Ok(Self::from_fn(self.cols, rhs.cols, |i, j| dot(self.col(i), rhs.col(j))))
    }

    /// `self * rhsᵀ`.
    pub fn matmul_tr(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.matmul(&rhs.transpose())
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.zip_with("add", rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self> {
        self.zip_with("sub", rhs, |a, b| a - b)
    }

    fn zip_with(&self, op: &'static str, rhs: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape(
                op,
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_vec_unchecked(self.rows, self.cols, data))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| s * x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec_unchecked(self.rows, self.cols, self.data.iter().map(|&x| f(x)).collect())
    }

    /// `self + shift * I` for square matrices.
    pub fn shift_diagonal(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out.data[i + i * self.rows] += shift;
        }
        out
    }

    /// Copy of the sub-block `rows × cols`.
    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        assert!(rows.end <= self.rows && cols.end <= self.cols, "block out of range");
        let (nr, nc) = (rows.len(), cols.len());
        let mut data = Vec::with_capacity(nr * nc);
        for j in cols {
            data.extend_from_slice(&self.col(j)[rows.clone()]);
        }
        Self::from_vec_unchecked(nr, nc, data)
    }

    /// Places `blocks[i][j]` in block row `i`, block column `j`.
    pub fn from_blocks(blocks: &[&[&DenseMatrix]]) -> Result<Self> {
        let row_heights: Vec<usize> = blocks.iter().map(|br| br.first().map_or(0, |b| b.rows)).collect();
        let col_widths: Vec<usize> = blocks
            .first()
            .map(|br| br.iter().map(|b| b.cols).collect())
            .unwrap_or_default();
        for (bi, br) in blocks.iter().enumerate() {
            if br.len() != col_widths.len() {
                return Err(Error::contract("from_blocks", "ragged block rows"));
            }
            for (bj, b) in br.iter().enumerate() {
                if b.rows != row_heights[bi] || b.cols != col_widths[bj] {
                    return Err(Error::shape(
                        "from_blocks",
                        format!("block ({bi},{bj}) of {}x{}", row_heights[bi], col_widths[bj]),
                        format!("{}x{}", b.rows, b.cols),
                    ));
                }
            }
        }
        let rows: usize = row_heights.iter().sum();
        let cols: usize = col_widths.iter().sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for (bi, br) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for b in br.iter() {
                for j in 0..b.cols {
                    out.col_mut(c0 + j)[r0..r0 + b.rows].copy_from_slice(b.col(j));
                }
                c0 += b.cols;
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    /// `(S + Sᵀ) / 2`.
    pub fn symmetrize(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::contract("symmetrize", format!("{}x{} is not square", self.rows, self.cols)));
        }
        let n = self.rows;
        Ok(Self::from_fn(n, n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i))))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i + j * self.rows]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:>12.5e} ", self.get(i, j))?;
            }
            writeln!(f, "{}", if self.cols > 8 { "..." } else { "" })?;
        }
        if self.rows > 12 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators so the loop vectorizes
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// `y += alpha * x`.
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean norm, rescaled by a power of two when squares would overflow or
/// underflow (the rescaling is exact).
pub fn norm2(x: &[f64]) -> f64 {
    let big = x.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    if big == 0.0 || !big.is_finite() {
        return big;
    }
    if (1e-150..=1e150).contains(&big) {
        return dot(x, x).sqrt();
    }
    let shift = if big > 1.0 { -600 } else { 600 };
    let factor = 2.0_f64.powi(shift);
    let ss: f64 = x.iter().map(|&v| (v * factor) * (v * factor)).sum();
    ss.sqrt() * 2.0_f64.powi(-shift)
}
