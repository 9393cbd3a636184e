//! Small dense matrices over a [`Scalar`] field.

use std::fmt;
use std::ops::Mul;

use crate::scalar::{Real, Scalar};

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting. Exact for rational scalars.
    pub fn determinant(&self) -> S {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = S::one();
        for col in 0..n {
            let pivot = match pivot_row(&a, n, col) {
                Some(p) => p,
                None => return S::zero(),
            };
            if pivot != col {
                swap_rows(&mut a, n, pivot, col);
                det = -det;
            }
            let p = a[col * n + col].clone();
            det = det * p.clone();
            for r in col + 1..n {
                let factor = a[r * n + col].clone() / p.clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = a[col * n + c].clone();
                    a[r * n + c] = a[r * n + c].clone() - factor.clone() * v;
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse; `None` when a pivot vanishes.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = pivot_row(&a, n, col)?;
            if a[pivot * n + col].is_negligible() && !S::tolerance().is_zero() {
                // tolerance-level pivots are as good as singular in floating point
                let scale = self.max_abs();
                if a[pivot * n + col].abs() <= S::tolerance() * scale {
                    return None;
                }
            }
            swap_rows(&mut a, n, pivot, col);
            swap_rows(&mut inv, n, pivot, col);
            let p = a[col * n + col].clone();
            for c in 0..n {
                a[col * n + c] = a[col * n + c].clone() / p.clone();
                inv[col * n + c] = inv[col * n + c].clone() / p.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col].clone();
                if factor.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let av = a[col * n + c].clone();
                    let iv = inv[col * n + c].clone();
                    a[r * n + c] = a[r * n + c].clone() - factor.clone() * av;
                    inv[r * n + c] = inv[r * n + c].clone() - factor.clone() * iv;
                }
            }
        }
        Some(Matrix::from_rows(n, n, inv))
    }

    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .fold(S::zero(), |m, v| S::max_of(m, v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |m, (a, b)| S::max_of(m, (a.clone() - b.clone()).abs()))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|v| v.to_f64_lossy())
    }
}

impl<S: Real> Matrix<S> {
    /// Largest singular value (spectral norm).
    pub fn spectral_norm(&self) -> S {
        let ata = &self.transpose() * self;
        let n = ata.rows;
        if n == 1 {
            return ata[(0, 0)].sqrt();
        }
        if n == 2 {
            let (a, b, d) = (ata[(0, 0)], ata[(0, 1)], ata[(1, 1)]);
            let two = S::one() + S::one();
            let half_tr = (a + d) / two;
            let disc = ((a - d) / two).powi(2) + b * b;
            return (half_tr + disc.sqrt()).max(S::zero()).sqrt();
        }
        // power iteration on the Gram matrix
        let mut v = vec![S::one(); n];
        let mut lambda = S::zero();
        for _ in 0..500 {
            let w = ata.mul_vec(&v);
            let norm = w.iter().fold(S::zero(), |acc, x| acc + *x * *x).sqrt();
            if norm.is_zero() {
                return S::zero();
            }
            v = w.into_iter().map(|x| x / norm).collect();
            if (norm - lambda).abs() <= S::epsilon() * norm {
                lambda = norm;
                break;
            }
            lambda = norm;
        }
        lambda.sqrt()
    }

    /// Both singular values of a 2x2 matrix, largest first.
    pub fn singular_values_2x2(&self) -> (S, S) {
        assert_eq!((self.rows, self.cols), (2, 2));
        let smax = self.spectral_norm();
        let det = self.determinant().abs();
        let smin = if smax.is_zero() { S::zero() } else { det / smax };
        (smax, smin)
    }
}

fn pivot_row<S: Scalar>(a: &[S], n: usize, col: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for r in col..n {
        let v = a[r * n + col].abs();
        if v.is_zero() {
            continue;
        }
        match best {
            Some(b) if a[b * n + col].abs() >= v => {}
            _ => best = Some(r),
        }
    }
    best
}

fn swap_rows<S>(a: &mut [S], n: usize, r1: usize, r2: usize) {
    if r1 == r2 {
        return;
    }
    for c in 0..n {
        a.swap(r1 * n + c, r2 * n + c);
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, rhs.rows);
        let mut out: Matrix<S> = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = v;
                }
            }
        }
        out
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.rows {
            list.entry(&&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        list.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn inverse_round_trip_f64() {
        let m: Matrix<f64> = Matrix::from_rows(3, 3, vec![2.0, 1.0, 0.0, 0.5, 3.0, 1.0, 0.0, -1.0, 4.0]);
        let inv = m.inverse().unwrap();
        let id = &m * &inv;
        assert!(id.max_abs_diff(&Matrix::identity(3)) < 1e-14);
        assert!((m.determinant() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn exact_rational_inverse() {
        let m = Matrix::from_rows(2, 2, vec![q(1, 2), q(1, 3), q(0, 1), q(2, 3)]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(2));
        assert_eq!(m.determinant(), q(1, 3));
    }

    #[test]
    fn singular_detected() {
        let m = Matrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(m.inverse().is_none());
        assert_eq!(m.determinant(), 0.0);
    }

    #[test]
    fn spectral_norms() {
        let m = Matrix::from_rows(2, 2, vec![0.0, -0.3, -0.6, -0.3]);
        let (s1, s2) = m.singular_values_2x2();
        // Gram matrix [[0.36, 0.18], [0.18, 0.18]]
        let tr: f64 = 0.54;
        let det: f64 = 0.36 * 0.18 - 0.18 * 0.18;
        let l1 = (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0;
        assert!((s1 - l1.sqrt()).abs() < 1e-12);
        assert!((s1 * s2 - 0.18).abs() < 1e-12);
        let big: Matrix<f64> = Matrix::from_rows(3, 3, vec![3.0, 0.0, 0.0, 0.0, -5.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((big.spectral_norm() - 5.0).abs() < 1e-9);
    }
}
