//! One-sided Jacobi SVD.
//!
//! The kernel works on columns stored as `e^{L_j} b_j` with `b_j` of unit
//! norm, so that matrices whose column scales differ by hundreds of orders of
//! magnitude (products of long chains) are diagonalized without forming the
//! unscaled entries. For an ordinary matrix all `L_j` start at the log of the
//! column norm and the iteration is plain Hestenes-Jacobi.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::matrix::{dot, norm, Matrix};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 30;
pub const TOL_SVD: f64 = 1e-13;
/// Relative threshold on s_m / s_1 below which a matrix is treated as singular.
pub const TOL_INV: f64 = 1e-12;
const TOL_SIGN: f64 = 1e-12;

/// `a = U diag(s) V^T`, singular values in non-increasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

/// SVD with singular values kept as logarithms; `-inf` marks an exact zero.
#[derive(Clone, Debug)]
pub struct LogSvd {
    pub u: Matrix,
    pub log_s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// Right singular subspace spanned by the leading `k` columns of V.
    pub fn leading_right(&self, k: usize) -> Matrix {
        self.v.leading_cols(k)
    }

    pub fn leading_left(&self, k: usize) -> Matrix {
        self.u.leading_cols(k)
    }

    pub fn to_log(&self) -> LogSvd {
        LogSvd { u: self.u.clone(), log_s: self.s.iter().map(|s| s.ln()).collect(), v: self.v.clone() }
    }
}

pub(crate) struct Graded {
    pub cols: Vec<Vec<f64>>,
    pub logs: Vec<f64>,
    pub acc: Matrix,
}

/// Split raw columns into unit directions and log norms.
pub(crate) fn normalize_columns(cols: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut logs = Vec::with_capacity(cols.len());
    let mut out = Vec::with_capacity(cols.len());
    for mut c in cols {
        let n = norm(&c);
        if n > 0.0 {
            c.iter_mut().for_each(|x| *x /= n);
            logs.push(n.ln());
        } else {
            c.iter_mut().for_each(|x| *x = 0.0);
            logs.push(f64::NEG_INFINITY);
        }
        out.push(c);
    }
    (out, logs)
}

fn renormalize(b: &mut [f64], l: &mut f64) {
    let n = norm(b);
    if n > 0.0 && n.is_finite() {
        b.iter_mut().for_each(|x| *x /= n);
        *l += n.ln();
    } else {
        b.iter_mut().for_each(|x| *x = 0.0);
        *l = f64::NEG_INFINITY;
    }
}

/// Orthogonalize the scaled columns `e^{L_j} b_j` by plane rotations,
/// accumulating the rotations in `acc`.
pub(crate) fn graded_jacobi(mut cols: Vec<Vec<f64>>, mut logs: Vec<f64>) -> Result<Graded> {
    let n = cols.len();
    let len = cols.first().map_or(0, |c| c.len());
    let rot_tol = (len.max(n).max(1) as f64) * f64::EPSILON;
    let mut acc = Matrix::identity(n);
    let mut last_off = 0.0;
    for _sweep in 0..MAX_SWEEPS {
        let mut max_off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                if logs[p] == f64::NEG_INFINITY || logs[q] == f64::NEG_INFINITY {
                    continue;
                }
                let (big, small) = if logs[p] >= logs[q] { (p, q) } else { (q, p) };
                let a_big = dot(&cols[big], &cols[big]);
                let a_small = dot(&cols[small], &cols[small]);
                let g = dot(&cols[big], &cols[small]);
                let off = g.abs() / (a_big * a_small).sqrt();
                max_off = max_off.max(off);
                if off <= rot_tol {
                    continue;
                }
                let eps = (logs[small] - logs[big]).exp();
                let nn = eps * eps * a_small - a_big;
                let sgn = if nn >= 0.0 { 1.0 } else { -1.0 };
                let t_over_eps = sgn * 2.0 * g / (nn.abs() + (nn * nn + 4.0 * g * g * eps * eps).sqrt());
                let t = t_over_eps * eps;
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ct = c * t_over_eps;
                let se = s * eps;
                for i in 0..len {
                    let xb = cols[big][i];
                    let xs = cols[small][i];
                    cols[big][i] = c * xb - se * xs;
                    cols[small][i] = ct * xb + c * xs;
                }
                for i in 0..n {
                    let vb = acc[(i, big)];
                    let vs = acc[(i, small)];
                    acc[(i, big)] = c * vb - s * vs;
                    acc[(i, small)] = s * vb + c * vs;
                }
                renormalize(&mut cols[big], &mut logs[big]);
                renormalize(&mut cols[small], &mut logs[small]);
            }
        }
        last_off = max_off;
        if max_off <= rot_tol {
            return Ok(Graded { cols, logs, acc });
        }
    }
    if last_off <= TOL_SVD {
        Ok(Graded { cols, logs, acc })
    } else {
        Err(Error::NonConvergence { sweeps: MAX_SWEEPS, off: last_off })
    }
}

/// Fill zero columns of `basis` (length-`m` vectors) with an orthonormal completion.
pub(crate) fn complete_basis(basis: &mut [Vec<f64>]) {
    let m = basis.first().map_or(0, |c| c.len());
    let mut next_e = 0;
    for j in 0..basis.len() {
        if norm(&basis[j]) > 0.5 {
            continue;
        }
        while next_e < m {
            let mut cand = vec![0.0; m];
            cand[next_e] = 1.0;
            next_e += 1;
            for _ in 0..2 {
                for (k, b) in basis.iter().enumerate() {
                    if k == j || norm(b) < 0.5 {
                        continue;
                    }
                    let d = dot(&cand, b);
                    cand.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                }
            }
            let n = norm(&cand);
            if n > 0.5 {
                cand.iter_mut().for_each(|x| *x /= n);
                basis[j] = cand;
                break;
            }
        }
    }
}

/// Sort by decreasing log value; returns the permutation.
pub(crate) fn descending_order(logs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..logs.len()).collect();
    idx.sort_by(|&a, &b| logs[b].partial_cmp(&logs[a]).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
    idx
}

/// Make the first entry of magnitude above the threshold of each column of
/// `right` positive, flipping the paired column of `left`.
pub(crate) fn fix_signs(left: &mut Matrix, right: &mut Matrix) {
    for j in 0..right.cols() {
        let mut flip = false;
        for i in 0..right.rows() {
            let x = right[(i, j)];
            if x.abs() > TOL_SIGN {
                flip = x < 0.0;
                break;
            }
        }
        if flip {
            for i in 0..right.rows() {
                right[(i, j)] = -right[(i, j)];
            }
            for i in 0..left.rows() {
                left[(i, j)] = -left[(i, j)];
            }
        }
    }
}

fn check_finite(a: &Matrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain("matrix has non-finite entries".into()))
    }
}

/// Thin SVD in log form of an `r x c` matrix with `r >= c`.
fn log_svd_tall(a: &Matrix) -> Result<LogSvd> {
    let c = a.cols();
    let (cols, logs) = normalize_columns((0..c).map(|j| a.col(j)).collect());
    let g = graded_jacobi(cols, logs)?;
    let order = descending_order(&g.logs);
    let mut ucols: Vec<Vec<f64>> = order.iter().map(|&k| g.cols[k].clone()).collect();
    complete_basis(&mut ucols);
    let mut u = Matrix::from_cols(&ucols);
    let mut v = Matrix::zeros(c, c);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..c {
            v[(i, new)] = g.acc[(i, old)];
        }
    }
    fix_signs(&mut u, &mut v);
    Ok(LogSvd { u, log_s: order.iter().map(|&k| g.logs[k]).collect(), v })
}

/// SVD in log form of any matrix. For wide inputs the transpose is factored.
pub fn log_svd(a: &Matrix) -> Result<LogSvd> {
    check_finite(a)?;
    if a.rows() >= a.cols() {
        log_svd_tall(a)
    } else {
        let t = log_svd_tall(&a.transpose())?;
        let mut u = t.v;
        let mut v = t.u;
        fix_signs(&mut u, &mut v);
        Ok(LogSvd { u, log_s: t.log_s, v })
    }
}

/// Full SVD of a matrix; square inputs give square U and V.
pub fn svd_full(a: &Matrix) -> Result<Svd> {
    let l = log_svd(a)?;
    Ok(Svd { u: l.u, s: l.log_s.iter().map(|x| x.exp()).collect(), v: l.v })
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    Ok(svd_full(a)?.s)
}

/// Singular values of an invertible matrix; fails when s_m < TOL_INV * s_1.
pub fn sv(a: &Matrix) -> Result<Vec<f64>> {
    let s = singular_values(a)?;
    check_invertible(&s)?;
    Ok(s)
}

pub fn check_invertible(s: &[f64]) -> Result<()> {
    let largest = s.first().copied().unwrap_or(0.0);
    let smallest = s.last().copied().unwrap_or(0.0);
    if largest == 0.0 || smallest < TOL_INV * largest {
        Err(Error::SingularInput { smallest, largest })
    } else {
        Ok(())
    }
}

/// Operator 2-norm.
pub fn norm2(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}
