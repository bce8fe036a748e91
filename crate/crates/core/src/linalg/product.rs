//! Long matrix products kept in graded QR form.
//!
//! `P = Q · diag(e^{L}) · B` with `Q` orthogonal, `B` upper triangular with
//! unit rows and `L` the row log-scales. Left-multiplying by a new factor
//! re-triangularizes `A·Q`, and the new rows of the triangular part are formed
//! relative to their own scale, so singular values of the product that differ
//! by far more than the double range remain resolved.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::matrix::{norm, Matrix};
use super::svd::{complete_basis, descending_order, fix_signs, graded_jacobi, LogSvd};
use crate::error::Result;

/// Householder QR of a square matrix; `R` has a non-negative diagonal.
pub fn householder_qr(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.rows();
    let mut r = a.clone();
    let mut q = Matrix::identity(n);
    for k in 0..n.saturating_sub(1) {
        let x: Vec<f64> = (k..n).map(|i| r[(i, k)]).collect();
        let nx = norm(&x);
        if nx == 0.0 {
            continue;
        }
        let alpha = if x[0] > 0.0 { -nx } else { nx };
        let mut v = x;
        v[0] -= alpha;
        let nv = norm(&v);
        if nv == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|t| *t /= nv);
        for j in 0..n {
            let s: f64 = (k..n).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..n {
                r[(i, j)] -= 2.0 * v[i - k] * s;
            }
        }
        for i in 0..n {
            let s: f64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum();
            for j in k..n {
                q[(i, j)] -= 2.0 * s * v[j - k];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            r[(i, j)] = 0.0;
        }
        if r[(i, i)] < 0.0 {
            for j in i..n {
                r[(i, j)] = -r[(i, j)];
            }
            for t in 0..n {
                q[(t, i)] = -q[(t, i)];
            }
        }
    }
    (q, r)
}

#[derive(Clone, Debug)]
pub struct ScaledProduct {
    q: Matrix,
    b: Matrix,
    row_log: Vec<f64>,
    steps: usize,
}

impl ScaledProduct {
    pub fn identity(m: usize) -> Self {
        ScaledProduct { q: Matrix::identity(m), b: Matrix::identity(m), row_log: vec![0.0; m], steps: 0 }
    }

    pub fn from_matrices<'a, I: IntoIterator<Item = &'a Matrix>>(m: usize, factors: I) -> Self {
        let mut p = Self::identity(m);
        for a in factors {
            p.push(a);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// P ← a · P.
    pub fn push(&mut self, a: &Matrix) {
        let m = self.dim();
        assert_eq!(a.rows(), m, "factor dimension differs from product");
        let (q, r) = householder_qr(&a.matmul(&self.q));
        let mut b = Matrix::zeros(m, m);
        let mut logs = vec![f64::NEG_INFINITY; m];
        for j in 0..m {
            let w: Vec<f64> = (0..m)
                .map(|l| {
                    if l < j || r[(j, l)] == 0.0 || self.row_log[l] == f64::NEG_INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        r[(j, l)].abs().ln() + self.row_log[l]
                    }
                })
                .collect();
            let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top == f64::NEG_INFINITY {
                continue;
            }
            let mut row = vec![0.0; m];
            for l in j..m {
                if w[l] == f64::NEG_INFINITY {
                    continue;
                }
                let c = r[(j, l)].signum() * (w[l] - top).exp();
                for (t, x) in row.iter_mut().enumerate().skip(l) {
                    *x += c * self.b[(l, t)];
                }
            }
            let nr = norm(&row);
            if nr > 0.0 {
                logs[j] = top + nr.ln();
                for t in 0..m {
                    b[(j, t)] = row[t] / nr;
                }
            }
        }
        self.q = q;
        self.b = b;
        self.row_log = logs;
        self.steps += 1;
    }

    /// SVD of the accumulated product with log singular values.
    pub fn log_svd(&self) -> Result<LogSvd> {
        let m = self.dim();
        let cols: Vec<Vec<f64>> = (0..m).map(|j| self.b.row(j).to_vec()).collect();
        let g = graded_jacobi(cols, self.row_log.clone())?;
        let order = descending_order(&g.logs);
        let mut vcols: Vec<Vec<f64>> = order.iter().map(|&k| g.cols[k].clone()).collect();
        complete_basis(&mut vcols);
        let mut v = Matrix::from_cols(&vcols);
        let mut acc = Matrix::zeros(m, m);
        for (new, &old) in order.iter().enumerate() {
            for i in 0..m {
                acc[(i, new)] = g.acc[(i, old)];
            }
        }
        let mut u = self.q.matmul(&acc);
        fix_signs(&mut u, &mut v);
        Ok(LogSvd { u, log_s: order.iter().map(|&k| g.logs[k]).collect(), v })
    }

    /// log of the product's determinant modulus.
    pub fn log_abs_det(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.dim() {
            if self.row_log[j] == f64::NEG_INFINITY || self.b[(j, j)] == 0.0 {
                return f64::NEG_INFINITY;
            }
            s += self.row_log[j] + self.b[(j, j)].abs().ln();
        }
        s
    }

    /// Explicit product rescaled by e^{-shift}; only meaningful when the
    /// dynamic range fits in a double.
    pub fn to_matrix_scaled(&self, shift: f64) -> Matrix {
        let m = self.dim();
        let mut r = self.b.clone();
        for j in 0..m {
            let f = (self.row_log[j] - shift).exp();
            for t in 0..m {
                r[(j, t)] *= f;
            }
        }
        self.q.matmul(&r)
    }

    pub fn max_row_log(&self) -> f64 {
        self.row_log.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::dot;
    use crate::linalg::svd::svd_full;

    fn orthogonality_defect(q: &Matrix) -> f64 {
        let m = q.cols();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let d = dot(&q.col(i), &q.col(j)) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    #[test]
    fn qr_reconstructs() {
        let a = Matrix::from_rows(&[&[2.0, -1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, -4.0]]);
        let (q, r) = householder_qr(&a);
        assert!((&q * &r).sub(&a).max_abs() < 1e-14);
        assert!(orthogonality_defect(&q) < 1e-15);
        for i in 0..3 {
            assert!(r[(i, i)] >= 0.0);
        }
    }

    #[test]
    fn short_product_matches_direct_svd() {
        let a = Matrix::from_rows(&[&[2.0, 1.0, 0.0], &[0.5, 1.0, 1.0], &[0.0, -1.0, 0.5]]);
        let b = Matrix::from_rows(&[&[1.0, 0.0, 2.0], &[0.0, 3.0, 1.0], &[1.0, 1.0, 1.0]]);
        let p = ScaledProduct::from_matrices(3, [&a, &b, &a]);
        let direct = &(&a * &b) * &a;
        let ls = p.log_svd().unwrap();
        let s = svd_full(&direct).unwrap();
        for j in 0..3 {
            assert!((ls.log_s[j] - s.s[j].ln()).abs() < 1e-13);
        }
        assert!(p.to_matrix_scaled(0.0).sub(&direct).max_abs() < 1e-12 * direct.max_abs());
        assert!((p.log_abs_det() - direct.log_abs_det()).abs() < 1e-13);
    }

    #[test]
    fn extreme_range_diagonal() {
        // diag(e^3, 1, e^-3)^400: exponents 1200, 0, -1200 are far outside f64 range
        let d = Matrix::from_diag(&[3f64.exp(), 1.0, (-3f64).exp()]);
        let th: f64 = 0.4;
        let r = Matrix::from_rows(&[&[th.cos(), -th.sin(), 0.0], &[th.sin(), th.cos(), 0.0], &[0.0, 0.0, 1.0]]);
        let g = &(&r * &d) * &r.transpose();
        let mut p = ScaledProduct::identity(3);
        for _ in 0..400 {
            p.push(&g);
        }
        let ls = p.log_svd().unwrap();
        assert!((ls.log_s[0] - 1200.0).abs() < 1e-9);
        assert!(ls.log_s[1].abs() < 1e-9);
        assert!((ls.log_s[2] + 1200.0).abs() < 1e-9);
        // g is symmetric so its powers share the eigenbasis r·e_j
        for j in 0..3 {
            let c = dot(&ls.v.col(j), &r.col(j)).abs();
            assert!((c - 1.0).abs() < 1e-12);
        }
    }
}
