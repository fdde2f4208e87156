//! Small dense linear algebra: a row-major matrix, Cholesky, and a
//! column-pivoted QR used for numerical rank decisions.
//!
//! Everything here operates on matrices with at most a few dozen rows, so the
//! kernels favour clarity over blocking or SIMD.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::Scalar;

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Serialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged matrix columns");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: T, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + alpha * y;
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|x| *x = *x * alpha);
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = self.clone();
        m.add_scaled(-T::one(), other);
        m
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Principal submatrix on the given (sorted) index list.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut m = Self::zeros(k, k);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                m[(r, c)] = self[(i, j)];
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| U::lit(x.as_f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Lower-triangular Cholesky factor `L` with `M = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factorizes a symmetric matrix. Returns `None` as soon as a pivot falls
    /// to `pivot_floor` or below.
    pub fn new(m: &Matrix<T>, pivot_floor: T) -> Option<Self> {
        let n = m.rows();
        assert_eq!(n, m.cols(), "cholesky of non-square matrix");
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = m[(j, j)];
            for k in 0..j {
                diag = diag - l[(j, k)] * l[(j, k)];
            }
            if !(diag > pivot_floor) {
                return None;
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(Self { l })
    }

    /// Factorizes with the relative floor `CHOL_TOL * trace`.
    pub fn with_relative_floor(m: &Matrix<T>) -> Option<Self> {
        let floor = T::CHOL_TOL * m.trace().abs();
        Self::new(m, floor)
    }

    pub fn factor(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn determinant(&self) -> T {
        let n = self.l.rows();
        (0..n).fold(T::one(), |p, i| p * self.l[(i, i)] * self.l[(i, i)])
    }

    pub fn log_determinant(&self) -> T {
        let n = self.l.rows();
        (0..n).fold(T::zero(), |s, i| s + self.l[(i, i)].ln()) * T::lit(2.0)
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.l.rows();
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = s - self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.l.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        // symmetrize away the rounding asymmetry
        for i in 0..n {
            for j in i + 1..n {
                let v = (inv[(i, j)] + inv[(j, i)]) * T::lit(0.5);
                inv[(i, j)] = v;
                inv[(j, i)] = v;
            }
        }
        inv
    }
}

/// Outcome of a column-pivoted QR rank decision.
#[derive(Clone, Debug)]
pub struct RankDecision<T> {
    pub rank: usize,
    /// `|R_kk| / |R_00|` in pivot order.
    pub ratios: Vec<T>,
    /// Whether any ratio sits within a factor of ten of the threshold.
    pub near_tie: bool,
}

/// Numerical rank of the matrix whose columns are `columns`, using
/// Householder QR with column pivoting and threshold `rel_tol * |R_00|`.
pub fn column_rank<T: Scalar>(columns: &[Vec<T>], rel_tol: T) -> RankDecision<T> {
    let ncols = columns.len();
    if ncols == 0 {
        return RankDecision {
            rank: 0,
            ratios: Vec::new(),
            near_tie: false,
        };
    }
    let nrows = columns[0].len();
    let mut cols: Vec<Vec<T>> = columns.to_vec();
    let steps = nrows.min(ncols);
    let mut ratios = Vec::with_capacity(steps);
    let mut lead = T::zero();
    for k in 0..steps {
        // pivot: remaining column with largest trailing norm
        let (p, pnorm) = (k..ncols)
            .map(|j| (j, norm2(&cols[j][k..])))
            .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        cols.swap(k, p);
        if k == 0 {
            lead = pnorm;
            if lead == T::zero() {
                return RankDecision {
                    rank: 0,
                    ratios: vec![T::zero(); steps],
                    near_tie: false,
                };
            }
        }
        ratios.push(pnorm / lead);
        if pnorm == T::zero() {
            continue;
        }
        // Householder reflector zeroing cols[k][k+1..]
        let alpha = if cols[k][k] > T::zero() { -pnorm } else { pnorm };
        let mut v: Vec<T> = cols[k][k..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == T::zero() {
            continue;
        }
        for col in cols.iter_mut().skip(k) {
            let proj = dot(&v, &col[k..]) * T::lit(2.0) / vnorm2;
            for (c, &vi) in col[k..].iter_mut().zip(&v) {
                *c = *c - proj * vi;
            }
        }
    }
    let rank = ratios.iter().filter(|&&r| r > rel_tol).count();
    let ten = T::lit(10.0);
    let near_tie = ratios
        .iter()
        .any(|&r| r > rel_tol / ten && r < rel_tol * ten);
    RankDecision {
        rank,
        ratios,
        near_tie,
    }
}
