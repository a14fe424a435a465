//! Small dense linear algebra used by the LP core and the checkers.
//!
//! Everything here is row-major and sized for problems of a few thousand
//! unknowns at most.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{dim_err, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err!(
                "{} values cannot fill a {}x{} matrix",
                data.len(),
                rows,
                cols
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix whose rows are the given slices.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(dim_err!("row {} has {} entries, expected {}", i, r.len(), cols));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given slices.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C], rows: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(dim_err!("column {} has {} entries, expected {}", j, c.len(), rows));
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
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

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            let src = self.row(i);
            for (jj, &j) in cols.iter().enumerate() {
                m[(i, jj)] = src[j];
            }
        }
        m
    }

    /// `self * x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T * y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(dim_err!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let src = other.row(l);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        norm_inf(&self.data)
    }

    /// Numerical rank by Gaussian elimination with complete pivoting.
    ///
    /// Pivots below `rel_tol * max|a_ij|` count as zero.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let mut a = self.clone();
        let tol = rel_tol * a.max_abs().max(f64::MIN_POSITIVE);
        let (m, n) = (a.rows, a.cols);
        let mut rank = 0;
        for step in 0..m.min(n) {
            let (mut pr, mut pc, mut best) = (step, step, 0.0);
            for i in step..m {
                for j in step..n {
                    let v = a[(i, j)].abs();
                    if v > best {
                        best = v;
                        pr = i;
                        pc = j;
                    }
                }
            }
            if best <= tol {
                break;
            }
            a.swap_rows(step, pr);
            a.swap_cols(step, pc);
            let piv = a[(step, step)];
            for i in step + 1..m {
                let f = a[(i, step)] / piv;
                if f == 0.0 {
                    continue;
                }
                for j in step..n {
                    let v = a[(step, j)];
                    a[(i, j)] -= f * v;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of the right nullspace, read off the reduced row echelon form.
    ///
    /// Returns one vector per free column, in increasing column order.
    pub fn nullspace(&self, rel_tol: f64) -> Vec<Vec<f64>> {
        let ech = Echelon::new(self, rel_tol);
        let n = self.cols;
        let mut is_pivot = vec![false; n];
        for &c in &ech.pivot_cols {
            is_pivot[c] = true;
        }
        (0..n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![0.0; n];
                v[f] = 1.0;
                for (r, &pc) in ech.pivot_cols.iter().enumerate() {
                    v[pc] = -ech.reduced[(r, f)];
                }
                v
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Reduced row echelon form with partial pivoting.
struct Echelon {
    reduced: DenseMatrix,
    pivot_cols: Vec<usize>,
}

impl Echelon {
    fn new(a: &DenseMatrix, rel_tol: f64) -> Self {
        let mut r = a.clone();
        let tol = rel_tol * a.max_abs().max(f64::MIN_POSITIVE);
        let (m, n) = (r.rows, r.cols);
        let mut pivot_cols = Vec::new();
        let mut row = 0;
        for col in 0..n {
            if row == m {
                break;
            }
            let (mut p, mut best) = (row, 0.0);
            for i in row..m {
                let v = r[(i, col)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tol {
                for i in row..m {
                    r[(i, col)] = 0.0;
                }
                continue;
            }
            r.swap_rows(row, p);
            let piv = r[(row, col)];
            for v in r.row_mut(row) {
                *v /= piv;
            }
            for i in 0..m {
                if i == row {
                    continue;
                }
                let f = r[(i, col)];
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = r[(row, j)];
                    r[(i, j)] -= f * v;
                }
            }
            pivot_cols.push(col);
            row += 1;
        }
        Self {
            reduced: r,
            pivot_cols,
        }
    }
}

/// Rows of `[a | b]` that span the row space of `a`, plus the consistency of
/// the remaining rows.
#[derive(Debug, Clone)]
pub struct RowBasis {
    /// Original indices of a maximal independent set of rows, ascending.
    pub independent: Vec<usize>,
    /// Largest right-hand-side mismatch left on a dependent row.
    pub inconsistency: f64,
}

/// Finds independent rows of `a` by elimination on the rows, carrying `b`
/// along to measure how inconsistent the dependent rows are.
pub fn row_basis(a: &DenseMatrix, b: &[f64], rel_tol: f64) -> RowBasis {
    let (m, n) = (a.rows, a.cols);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let tol = rel_tol * scale;
    let mut work = a.clone();
    let mut rhs = b.to_vec();
    let mut order: Vec<usize> = (0..m).collect();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let (mut p, mut best) = (row, 0.0);
        for i in row..m {
            let v = work[(i, col)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= tol {
            continue;
        }
        work.swap_rows(row, p);
        rhs.swap(row, p);
        order.swap(row, p);
        let piv = work[(row, col)];
        for i in row + 1..m {
            let f = work[(i, col)] / piv;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = work[(row, j)];
                work[(i, j)] -= f * v;
            }
            rhs[i] -= f * rhs[row];
        }
        row += 1;
    }
    let mut independent: Vec<usize> = order[..row].to_vec();
    independent.sort_unstable();
    let inconsistency = rhs[row..].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    RowBasis {
        independent,
        inconsistency,
    }
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

/// Returned when a pivot vanishes during factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular;

impl Lu {
    pub fn factor(a: &DenseMatrix) -> core::result::Result<Self, Singular> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                if f == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        // A = P^T L U, so A^T x = b  <=>  U^T L^T (P x) = b.
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }
}

/// Thin QR of a tall matrix by modified Gram-Schmidt with one
/// reorthogonalization pass. Columns that are numerically dependent on
/// earlier ones are dropped.
#[derive(Debug, Clone)]
pub struct ThinQr {
    q: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    kept: Vec<usize>,
    cols: usize,
}

impl ThinQr {
    pub fn new(a: &DenseMatrix, rel_tol: f64) -> Self {
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut r: Vec<Vec<f64>> = Vec::new();
        let mut kept = Vec::new();
        for j in 0..a.cols {
            let orig = a.column(j);
            let orig_norm = norm2(&orig);
            let mut v = orig;
            let mut coeffs = vec![0.0; q.len()];
            for _pass in 0..2 {
                for (qi, c) in q.iter().zip(coeffs.iter_mut()) {
                    let d = dot(qi, &v);
                    *c += d;
                    for (vv, &qq) in v.iter_mut().zip(qi) {
                        *vv -= d * qq;
                    }
                }
            }
            let nv = norm2(&v);
            if orig_norm == 0.0 || nv <= rel_tol * orig_norm {
                continue;
            }
            for vv in &mut v {
                *vv /= nv;
            }
            coeffs.push(nv);
            q.push(v);
            r.push(coeffs);
            kept.push(j);
        }
        Self {
            q,
            r,
            kept,
            cols: a.cols,
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.kept.len() == self.cols
    }

    /// `b - Q Q^T b`
    pub fn range_residual(&self, b: &[f64]) -> Vec<f64> {
        let mut res = b.to_vec();
        for _pass in 0..2 {
            for qi in &self.q {
                let d = dot(qi, &res);
                for (rv, &qq) in res.iter_mut().zip(qi) {
                    *rv -= d * qq;
                }
            }
        }
        res
    }

    /// Least-squares solution for a full-rank factorization.
    pub fn solve_least_squares(&self, b: &[f64]) -> Option<Vec<f64>> {
        if !self.is_full_rank() {
            return None;
        }
        let c = self.q.len();
        let qtb: Vec<f64> = self.q.iter().map(|qi| dot(qi, b)).collect();
        let mut x = vec![0.0; c];
        for i in (0..c).rev() {
            let mut s = qtb[i];
            for j in i + 1..c {
                // r[j] holds column j of R (rows 0..=j).
                s -= self.r[j][i] * x[j];
            }
            x[i] = s / self.r[i][i];
        }
        Some(x)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `max_i |a_i - b_i|`
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}
