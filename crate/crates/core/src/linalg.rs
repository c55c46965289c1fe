//! Small dense linear algebra over [`Real`] scalars.
//!
//! The systems in this crate are at most a few dozen unknowns, so plain
//! row-major storage with full-pivoting LU and one-sided Jacobi SVD is
//! enough. Both are generic so the double-double mode shares the code path.

use std::ops::{Index, IndexMut};

use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row vectors; all rows must share one length.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let other_t = other.transpose();
        Self::from_fn(self.rows, other.cols, |i, j| {
            T::dot(self.row(i), other_t.row(j))
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| T::dot(self.row(i), v)).collect()
    }

    /// Appends a row at the bottom.
    pub fn push_row(&mut self, row: &[T]) {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// Copy without the listed column.
    pub fn without_column(&self, col: usize) -> Self {
        Self::from_fn(self.rows, self.cols - 1, |i, j| {
            self[(i, if j < col { j } else { j + 1 })]
        })
    }

    /// Reorders rows and columns: `out[(i, j)] = self[(rows[i], cols[j])]`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| if x.abs() > acc { x.abs() } else { acc })
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.lower())
    }

    /// Scales columns, then rows, to unit Euclidean norm. Zero lines are left alone.
    pub fn equilibrated(&self) -> Self {
        self.equilibration().0
    }

    /// The equilibrated matrix `E = diag(r) A diag(c)` with its row and column factors.
    pub fn equilibration(&self) -> (Self, Vec<T>, Vec<T>) {
        let mut out = self.clone();
        let mut col = vec![T::one(); out.cols];
        let mut row = vec![T::one(); out.rows];
        for (j, cj) in col.iter_mut().enumerate() {
            let norm = (0..out.rows)
                .fold(T::zero(), |acc, i| acc + out[(i, j)] * out[(i, j)])
                .sqrt();
            if norm > T::zero() {
                *cj = T::one() / norm;
                for i in 0..out.rows {
                    out[(i, j)] = out[(i, j)] / norm;
                }
            }
        }
        for (i, ri) in row.iter_mut().enumerate() {
            let norm = out.row(i).iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
            if norm > T::zero() {
                *ri = T::one() / norm;
                for j in 0..out.cols {
                    out[(i, j)] = out[(i, j)] / norm;
                }
            }
        }
        (out, row, col)
    }

    /// Inverse of a square matrix computed on its equilibrated form, so badly
    /// scaled but well conditioned matrices are accepted.
    pub fn scaled_inverse(&self) -> Option<Self> {
        let (e, row, col) = self.equilibration();
        let inv = FullPivLu::new(&e).inverse()?;
        Some(Matrix::from_fn(self.cols, self.rows, |i, j| col[i] * inv[(i, j)] * row[j]))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `P A Q = L U` with complete pivoting.
#[derive(Debug, Clone)]
pub struct FullPivLu<T> {
    original: Matrix<T>,
    lu: Matrix<T>,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    transpositions: usize,
}

impl<T: Real> FullPivLu<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut transpositions = 0;

        for k in 0..n {
            let (mut pr, mut pc, mut best) = (k, k, T::zero());
            for i in k..n {
                for j in k..n {
                    let v = lu[(i, j)].abs();
                    if v > best {
                        best = v;
                        pr = i;
                        pc = j;
                    }
                }
            }
            if best == T::zero() {
                break;
            }
            if pr != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pr, j)];
                    lu[(pr, j)] = tmp;
                }
                row_perm.swap(k, pr);
                transpositions += 1;
            }
            if pc != k {
                for i in 0..n {
                    let tmp = lu[(i, k)];
                    lu[(i, k)] = lu[(i, pc)];
                    lu[(i, pc)] = tmp;
                }
                col_perm.swap(k, pc);
                transpositions += 1;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let upd = lu[(i, j)] - factor * lu[(k, j)];
                    lu[(i, j)] = upd;
                }
            }
        }

        FullPivLu {
            original: a.clone(),
            lu,
            row_perm,
            col_perm,
            transpositions,
        }
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// Ratio of the smallest to the largest pivot; a cheap reciprocal condition proxy.
    pub fn pivot_ratio(&self) -> T {
        let n = self.dim();
        if n == 0 {
            return T::one();
        }
        let first = self.lu[(0, 0)].abs();
        if first == T::zero() {
            return T::zero();
        }
        self.lu[(n - 1, n - 1)].abs() / first
    }

    /// True when every pivot is nonzero and not lost in rounding.
    pub fn is_invertible(&self) -> bool {
        let n = T::lift(self.dim().max(1) as f64);
        self.pivot_ratio() > n * T::epsilon()
    }

    pub fn determinant(&self) -> T {
        let n = self.dim();
        let mut det = if self.transpositions % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        for k in 0..n {
            det = det * self.lu[(k, k)];
        }
        det
    }

    fn solve_raw(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y: Vec<T> = self.row_perm.iter().map(|&r| b[r]).collect();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc = acc - self.lu[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc = acc - self.lu[(i, j)] * y[j];
            }
            y[i] = acc / self.lu[(i, i)];
        }
        let mut x = vec![T::zero(); n];
        for (k, &c) in self.col_perm.iter().enumerate() {
            x[c] = y[k];
        }
        x
    }

    /// Solves `A x = b` followed by one step of iterative refinement.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        if !self.is_invertible() {
            return None;
        }
        let mut x = self.solve_raw(b);
        let ax = self.original.mul_vec(&x);
        let residual: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let correction = self.solve_raw(&residual);
        for (xi, ci) in x.iter_mut().zip(correction) {
            *xi = *xi + ci;
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix<T>> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }
}

/// Singular values and right singular vectors from one-sided Jacobi.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// Descending.
    pub singular_values: Vec<T>,
    /// Column `k` is the right singular vector for `singular_values[k]`.
    pub v: Matrix<T>,
    rows: usize,
}

impl<T: Real> Svd<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        let (m, n) = a.shape();
        // Work on columns stored contiguously.
        let mut cols: Vec<Vec<T>> = (0..n).map(|j| a.column(j)).collect();
        let mut v = Matrix::<T>::identity(n);
        let eps = T::epsilon();
        // Columns below this squared norm are numerically null. Wide matrices
        // always produce some, and rotating against them can overflow.
        let null = eps * eps * cols.iter().fold(T::zero(), |acc, c| acc + T::dot(c, c));

        for _sweep in 0..80 {
            let mut rotated = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    let alpha = T::dot(&cols[i], &cols[i]);
                    let beta = T::dot(&cols[j], &cols[j]);
                    let gamma = T::dot(&cols[i], &cols[j]);
                    if alpha <= null || beta <= null || gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let two = T::lift(2.0);
                    let zeta = (beta - alpha) / (two * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for r in 0..m {
                        let xi = cols[i][r];
                        let xj = cols[j][r];
                        cols[i][r] = c * xi - s * xj;
                        cols[j][r] = s * xi + c * xj;
                    }
                    for r in 0..n {
                        let vi = v[(r, i)];
                        let vj = v[(r, j)];
                        v[(r, i)] = c * vi - s * vj;
                        v[(r, j)] = s * vi + c * vj;
                    }
                }
            }
            if !rotated {
                break;
            }
        }

        let mut sigma: Vec<(T, usize)> = cols
            .iter()
            .enumerate()
            .map(|(k, c)| (T::dot(c, c).sqrt(), k))
            .collect();
        sigma.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        let order: Vec<usize> = sigma.iter().map(|&(_, k)| k).collect();
        let v_sorted = Matrix::from_fn(n, n, |r, k| v[(r, order[k])]);
        Svd {
            singular_values: sigma.into_iter().map(|(s, _)| s).collect(),
            v: v_sorted,
            rows: m,
        }
    }

    pub fn largest(&self) -> T {
        self.singular_values.first().copied().unwrap_or_else(T::zero)
    }

    /// Absolute cutoff `max(rows, cols) * sigma_max * rel_tol`.
    pub fn cutoff(&self, rel_tol: f64) -> T {
        let dim = self.rows.max(self.singular_values.len()).max(1);
        T::lift(dim as f64) * self.largest() * T::lift(rel_tol)
    }

    /// Numerical rank; never exceeds `min(rows, cols)`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = self.cutoff(rel_tol);
        let cap = self.rows.min(self.singular_values.len());
        self.singular_values
            .iter()
            .take(cap)
            .filter(|&&s| s > cut && s > T::zero())
            .count()
    }

    /// Ratio of the largest to the smallest retained singular value.
    pub fn condition(&self, rel_tol: f64) -> T {
        let r = self.rank(rel_tol);
        if r == 0 {
            return T::infinity();
        }
        self.largest() / self.singular_values[r - 1]
    }

    /// Right singular vector belonging to the smallest singular value.
    pub fn null_vector(&self) -> Vec<T> {
        let n = self.v.ncols();
        self.v.column(n - 1)
    }
}
