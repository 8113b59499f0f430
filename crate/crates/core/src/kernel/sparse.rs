use nalgebra::{Complex, ComplexField};

use super::dense::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::scalar::{cplx, modulus, Real};

/// Compressed-sparse-row complex operator.
///
/// Each `(row, col)` appears at most once and every stored value has modulus
/// above the drop tolerance it was built with (exact zeros are never stored).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator<T: Real> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SparseOperator<T> {
    /// Build from `(row, col, value)` triplets. Duplicates are summed; entries
    /// with modulus `<= drop_tol` (and exact zeros) are discarded.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I, drop_tol: T) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex<T>)>,
    {
        let mut per_row: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds");
            per_row[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut entries in per_row {
            entries.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < entries.len() {
                let c = entries[i].0;
                let mut acc = entries[i].1;
                i += 1;
                while i < entries.len() && entries[i].0 == c {
                    acc += entries[i].1;
                    i += 1;
                }
                let m = modulus(acc);
                if m > drop_tol && m != T::zero() {
                    col_idx.push(c);
                    values.push(acc);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, std::iter::empty(), T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal((0..n).map(|_| cplx(T::one())))
    }

    pub fn from_diagonal<I: IntoIterator<Item = Complex<T>>>(diag: I) -> Self {
        let d: Vec<_> = diag.into_iter().collect();
        let n = d.len();
        Self::from_triplets(n, n, d.into_iter().enumerate().map(|(i, v)| (i, i, v)), T::zero())
    }

    pub fn from_dense(m: &ComplexMatrix<T>, drop_tol: T) -> Self {
        let (r, c) = m.shape();
        let trip = (0..r).flat_map(|i| (0..c).map(move |j| (i, j, m[(i, j)])));
        Self::from_triplets(r, c, trip, drop_tol)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square operator.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of one row as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex<T>)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex<T>)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map(|(_, v)| v)
            .unwrap_or_else(|| cplx(T::zero()))
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.entries().map(|(r, c, v)| (c, r, v.conjugate()));
        Self::from_triplets(self.cols, self.rows, trip, T::zero())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let trip = self.entries().map(|(r, c, v)| (r, c, v * s));
        Self::from_triplets(self.rows, self.cols, trip, T::zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "sparse add")?;
        let trip = self.entries().chain(other.entries());
        Ok(Self::from_triplets(self.rows, self.cols, trip, T::zero()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(cplx(-T::one())))
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "sparse matmul",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let zero = cplx(T::zero());
        let mut acc = vec![zero; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut marked = vec![false; other.cols];
        let mut trip = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !marked[c] {
                        marked[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                trip.push((r, c, acc[c]));
                acc[c] = zero;
                marked[c] = false;
            }
            touched.clear();
        }
        Ok(Self::from_triplets(self.rows, other.cols, trip, T::zero()))
    }

    /// `self ⊗ other` in the standard block ordering.
    pub fn kron(&self, other: &Self) -> Self {
        let trip = self.entries().flat_map(|(r, c, a)| {
            other
                .entries()
                .map(move |(rr, cc, b)| (r * other.rows + rr, c * other.cols + cc, a * b))
        });
        Self::from_triplets(self.rows * other.rows, self.cols * other.cols, trip, T::zero())
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Exact sparse matrix-vector product.
    pub fn apply(&self, v: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                op: "apply_sparse",
                left: (self.rows, self.cols),
                right: (v.len(), 1),
            });
        }
        let mut out = ComplexVector::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = cplx(T::zero());
            for (c, a) in self.row(r) {
                acc += a * v[c];
            }
            out[r] = acc;
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()).sqrt()
    }

    /// Largest number of stored entries in any column.
    pub fn max_nnz_per_col(&self) -> usize {
        let mut counts = vec![0usize; self.cols];
        for &c in &self.col_idx {
            counts[c] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(r, c, _)| r == c)
    }

    fn same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch {
                op,
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        Ok(())
    }
}

/// Sparse matrix-vector product; free-function form of [`SparseOperator::apply`].
pub fn apply_sparse<T: Real>(op: &SparseOperator<T>, v: &ComplexVector<T>) -> Result<ComplexVector<T>> {
    op.apply(v)
}
