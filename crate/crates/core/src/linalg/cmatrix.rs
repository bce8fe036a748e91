use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_traits::{Float, Zero};

use super::matrix::Matrix;
use super::svd::{MAX_SWEEPS, TOL_SVD};
use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        CMatrix { rows, cols, data }
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn from_real(a: &Matrix) -> Self {
        CMatrix { rows: a.rows(), cols: a.cols(), data: a.as_slice().iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn real_part(&self) -> Matrix {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(|z| z.re).collect())
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Real representation: each entry a + ib becomes the block [[a, -b], [b, a]].
    pub fn realify(&self) -> Matrix {
        let mut out = Matrix::zeros(2 * self.rows, 2 * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                out[(2 * i, 2 * j)] = z.re;
                out[(2 * i, 2 * j + 1)] = -z.im;
                out[(2 * i + 1, 2 * j)] = z.im;
                out[(2 * i + 1, 2 * j + 1)] = z.re;
            }
        }
        out
    }

    /// Inverse by Gaussian elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if a[(i, k)].norm() > a[(p, k)].norm() {
                    p = i;
                }
            }
            if a[(p, k)].norm() == 0.0 {
                return Err(Error::SingularInput { smallest: 0.0, largest: 1.0 });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                    inv.data.swap(k * n + j, p * n + j);
                }
            }
            let piv = a[(k, k)];
            for j in 0..n {
                a[(k, j)] /= piv;
                inv[(k, j)] /= piv;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let akj = a[(k, j)];
                    let ikj = inv[(k, j)];
                    a[(i, j)] -= f * akj;
                    inv[(i, j)] -= f * ikj;
                }
            }
        }
        Ok(inv)
    }

    /// Singular values by complex one-sided Jacobi, non-increasing.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if !self.is_finite() {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        let a = if self.rows >= self.cols { self.clone() } else { self.transpose() };
        let (r, c) = (a.rows, a.cols);
        let mut cols: Vec<Vec<Complex64>> = (0..c).map(|j| (0..r).map(|i| a[(i, j)]).collect()).collect();
        let tol = (r.max(c) as f64) * f64::EPSILON;
        let mut last = 0.0;
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut max_off: f64 = 0.0;
            for p in 0..c {
                for q in p + 1..c {
                    let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                    let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                    let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                    let g = gamma.norm();
                    if alpha == 0.0 || beta == 0.0 || g == 0.0 {
                        continue;
                    }
                    let off = g / (alpha * beta).sqrt();
                    max_off = max_off.max(off);
                    if off <= tol {
                        continue;
                    }
                    // rotate the phase of column q so that the inner product is real
                    let phase = gamma.conj() / g;
                    cols[q].iter_mut().for_each(|z| *z *= phase);
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let cs = 1.0 / (1.0 + t * t).sqrt();
                    let sn = cs * t;
                    for i in 0..r {
                        let xp = cols[p][i];
                        let xq = cols[q][i];
                        cols[p][i] = xp * cs - xq * sn;
                        cols[q][i] = xp * sn + xq * cs;
                    }
                }
            }
            last = max_off;
            if max_off <= tol {
                converged = true;
                break;
            }
        }
        if !converged && last > TOL_SVD {
            return Err(Error::NonConvergence { sweeps: MAX_SWEEPS, off: last });
        }
        let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(s)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}
