//! Grassmannian and flag-manifold geometry.
//!
//! Distances are normalized so that the diameter is 1: `d = (2/π)·θ` where
//! θ is the angle between the unit k-vectors of the two subspaces. θ is
//! evaluated from the principal angles, which keeps small distances accurate
//! (an arccos of the Gram determinant would lose half the digits).

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::matrix::{dot, norm};
use crate::linalg::svd::{check_invertible, log_svd, LogSvd};
use crate::linalg::svf::{oplus_unchecked, GapReport};
use crate::linalg::{singular_values, Matrix, Signature};

const TOL_NESTED: f64 = 1e-9;

/// A point of the Grassmannian, held by a column-orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Wrap a basis that is already orthonormal.
    pub fn from_orthonormal(basis: Matrix) -> Self {
        Subspace { basis }
    }

    /// Orthonormalize the columns of `vectors`; fails if they are dependent.
    pub fn span(vectors: &Matrix) -> Result<Self> {
        Ok(Subspace { basis: orthonormalize(vectors)? })
    }

    pub fn zero(m: usize) -> Self {
        Subspace { basis: Matrix::zeros(m, 0) }
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Orthogonal projection of a vector.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.ambient()];
        for j in 0..self.dim() {
            let b = self.basis.col(j);
            let c = dot(&b, x);
            out.iter_mut().zip(&b).for_each(|(o, bi)| *o += c * bi);
        }
        out
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let g = &self.basis.transpose() * &self.basis;
        g.sub(&Matrix::identity(self.dim())).max_abs()
    }
}

/// Modified Gram–Schmidt with one re-pass; column order (hence nesting) is kept.
pub fn orthonormalize(a: &Matrix) -> Result<Matrix> {
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let mut v = a.col(j);
        for _ in 0..2 {
            for b in &q {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&v);
        if !(n > 1e-13 * scale) {
            return Err(Error::SingularInput { smallest: n, largest: scale });
        }
        v.iter_mut().for_each(|x| *x /= n);
        q.push(v);
    }
    if q.is_empty() {
        return Ok(Matrix::zeros(a.rows(), 0));
    }
    Ok(Matrix::from_cols(&q))
}

/// A τ-flag: one orthonormal frame whose first τ_j columns span F_j.
#[derive(Clone, Debug)]
pub struct Flag {
    tau: Signature,
    frame: Matrix,
}

impl Flag {
    pub fn from_orthonormal(tau: Signature, frame: Matrix) -> Self {
        assert_eq!(frame.cols(), tau.top(), "frame width must equal the last signature position");
        assert_eq!(frame.rows(), tau.ambient(), "frame height must equal the ambient dimension");
        Flag { tau, frame }
    }

    /// Flag spanned by the leading columns of `frame` (orthonormalized).
    pub fn from_frame(tau: Signature, frame: &Matrix) -> Result<Self> {
        if frame.rows() != tau.ambient() {
            return Err(Error::DimensionMismatch { expected: tau.ambient(), found: frame.rows() });
        }
        if frame.cols() < tau.top() {
            return Err(Error::DimensionMismatch { expected: tau.top(), found: frame.cols() });
        }
        Ok(Flag { frame: orthonormalize(&frame.leading_cols(tau.top()))?, tau })
    }

    /// Coordinate flag spanned by e_1, …, e_{τ_k}.
    pub fn standard(tau: Signature) -> Self {
        let m = tau.ambient();
        let frame = Matrix::identity(m).leading_cols(tau.top());
        Flag { tau, frame }
    }

    pub fn signature(&self) -> &Signature {
        &self.tau
    }

    pub fn frame(&self) -> &Matrix {
        &self.frame
    }

    /// Component F_j, 1-based.
    pub fn component(&self, j: usize) -> Subspace {
        Subspace { basis: self.frame.leading_cols(self.tau.tau(j)) }
    }

    pub fn components(&self) -> Vec<Subspace> {
        (1..=self.tau.len()).map(|j| self.component(j)).collect()
    }
}

fn same_dim(u: &Subspace, v: &Subspace) -> Result<()> {
    if u.ambient() != v.ambient() {
        return Err(Error::DimensionMismatch { expected: u.ambient(), found: v.ambient() });
    }
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    Ok(())
}

/// |det(B_Uᵀ B_V)|, clamped to [0, 1].
pub fn grassmann_correlation(u: &Subspace, v: &Subspace) -> Result<f64> {
    same_dim(u, v)?;
    if u.dim() == 0 {
        return Ok(1.0);
    }
    let c = &u.basis.transpose() * &v.basis;
    Ok(c.det().abs().min(1.0))
}

/// Angle in [0, π/2] between the unit k-vectors of U and V.
pub fn grassmann_angle(u: &Subspace, v: &Subspace) -> Result<f64> {
    let cos = grassmann_correlation(u, v)?;
    if u.dim() == 0 {
        return Ok(0.0);
    }
    // principal-angle sines are the singular values of (I - P_U) B_V
    let proj = &u.basis * &(&u.basis.transpose() * &v.basis);
    let resid = v.basis.sub(&proj);
    let sines = singular_values(&resid)?;
    let log_cos2: f64 = sines.iter().map(|s| (-(s * s).min(1.0)).ln_1p()).sum();
    let sin = (-log_cos2.exp_m1()).max(0.0).sqrt();
    Ok(sin.atan2(cos))
}

/// Normalized distance (2/π)·θ with diameter 1.
pub fn grassmann_distance(u: &Subspace, v: &Subspace) -> Result<f64> {
    Ok((grassmann_angle(u, v)? / FRAC_PI_2).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlagMetrics {
    /// max_j d(F_j, G_j)
    pub d: f64,
    /// min_j α(F_j, G_j)
    pub alpha: f64,
    /// (π/2)·d
    pub angle: f64,
}

fn same_signature(f: &Flag, g: &Flag) -> Result<()> {
    if f.tau != g.tau {
        Err(Error::SignatureMismatch)
    } else {
        Ok(())
    }
}

/// Per-component (distance, correlation) pairs.
pub fn component_metrics(f: &Flag, g: &Flag) -> Result<Vec<(f64, f64)>> {
    same_signature(f, g)?;
    let mut out = Vec::with_capacity(f.tau.len());
    for j in 1..=f.tau.len() {
        let (a, b) = (f.component(j), g.component(j));
        out.push((grassmann_distance(&a, &b)?, grassmann_correlation(&a, &b)?));
    }
    Ok(out)
}

pub fn flag_metrics(f: &Flag, g: &Flag) -> Result<FlagMetrics> {
    let comps = component_metrics(f, g)?;
    let d = comps.iter().map(|c| c.0).fold(0.0, f64::max);
    let alpha = comps.iter().map(|c| c.1).fold(1.0, f64::min);
    Ok(FlagMetrics { d, alpha, angle: FRAC_PI_2 * d })
}

pub fn flag_distance(f: &Flag, g: &Flag) -> Result<f64> {
    Ok(flag_metrics(f, g)?.d)
}

/// Distance from G to the critical set Σ(F), componentwise min_j (1 − d(F_j, G_j)).
pub fn critical_distance(f: &Flag, g: &Flag) -> Result<f64> {
    let comps = component_metrics(f, g)?;
    Ok(comps.iter().map(|c| 1.0 - c.0).fold(1.0, f64::min))
}

/// Most expanding τ-flags (v̂₋, v̂₊) from an SVD in log form.
pub fn flags_from_svd(l: &LogSvd, tau: &Signature, tol_gap: f64) -> Result<(Flag, Flag)> {
    let rep = GapReport::from_log_s(&l.log_s, tau, tol_gap);
    if !rep.has_gap {
        let (idx, r) = tau
            .positions()
            .iter()
            .zip(&rep.ratios)
            .find(|(_, r)| **r <= 1.0 + tol_gap)
            .map(|(i, r)| (*i, *r))
            .unwrap_or((tau.tau(1), rep.rho_min));
        return Err(Error::NoGap { index: idx, ratio: r });
    }
    let k = tau.top();
    Ok((Flag::from_orthonormal(tau.clone(), l.v.leading_cols(k)), Flag::from_orthonormal(tau.clone(), l.u.leading_cols(k))))
}

/// (v̂₋(g), v̂₊(g)): leading right and left singular vectors per level.
pub fn most_expanding_flags(g: &Matrix, tau: &Signature, tol_gap: f64) -> Result<(Flag, Flag)> {
    if tau.ambient() != g.rows() {
        return Err(Error::DimensionMismatch { expected: tau.ambient(), found: g.rows() });
    }
    let l = log_svd(g)?;
    let s: Vec<f64> = l.log_s.iter().map(|x| x.exp()).collect();
    check_invertible(&s)?;
    flags_from_svd(&l, tau, tol_gap)
}

/// φ_g(F) = (g F_1, …, g F_k).
pub fn flag_action(g: &Matrix, f: &Flag) -> Result<Flag> {
    check_invertible(&singular_values(g)?)?;
    flag_action_unchecked(g, f)
}

pub(crate) fn flag_action_unchecked(g: &Matrix, f: &Flag) -> Result<Flag> {
    let img = g * &f.frame;
    Ok(Flag { tau: f.tau.clone(), frame: orthonormalize(&img)? })
}

/// W ⊖ V = W ∩ V⊥ for V ⊂ W.
pub fn ominus(v: &Subspace, w: &Subspace) -> Result<Subspace> {
    if v.ambient() != w.ambient() {
        return Err(Error::DimensionMismatch { expected: w.ambient(), found: v.ambient() });
    }
    if v.dim() > w.dim() {
        return Err(Error::NotNested);
    }
    for j in 0..v.dim() {
        let x = v.basis.col(j);
        let p = w.project(&x);
        let r: f64 = x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if r > TOL_NESTED {
            return Err(Error::NotNested);
        }
    }
    let k = w.dim() - v.dim();
    if k == 0 {
        return Ok(Subspace::zero(w.ambient()));
    }
    // project W onto V⊥ and keep the dominant k directions
    let proj = &v.basis * &(&v.basis.transpose() * &w.basis);
    let resid = w.basis.sub(&proj);
    let l = log_svd(&resid)?;
    let basis = orthonormalize(&l.u.leading_cols(k))?;
    Ok(Subspace { basis })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansivityFactors {
    /// α_τ(g, g′) = min over positions.
    pub alpha: f64,
    /// β_τ(g, g′) = √(σ_τ(g)² ⊕ α_τ² ⊕ σ_τ(g′)²).
    pub beta: f64,
    pub alpha_pos: Vec<f64>,
    pub beta_pos: Vec<f64>,
}

/// Factors for the pair (g, g′) given their SVDs in log form.
pub fn expansivity_from_svds(lg: &LogSvd, lgp: &LogSvd, tau: &Signature, tol_gap: f64) -> Result<ExpansivityFactors> {
    let (_, vplus) = flags_from_svd(lg, tau, tol_gap)?;
    let (vminus, _) = flags_from_svd(lgp, tau, tol_gap)?;
    let comps = component_metrics(&vplus, &vminus)?;
    let sig = |l: &LogSvd, i: usize| (l.log_s[i] - l.log_s[i - 1]).exp();
    let mut alpha_pos = Vec::with_capacity(tau.len());
    let mut beta_pos = Vec::with_capacity(tau.len());
    let (mut sg, mut sgp): (f64, f64) = (0.0, 0.0);
    for (j, &i) in tau.positions().iter().enumerate() {
        let a = comps[j].1;
        let (s1, s2) = (sig(lg, i), sig(lgp, i));
        sg = sg.max(s1);
        sgp = sgp.max(s2);
        alpha_pos.push(a);
        beta_pos.push(beta_of(s1, a, s2));
    }
    let alpha = alpha_pos.iter().copied().fold(1.0, f64::min);
    Ok(ExpansivityFactors { alpha, beta: beta_of(sg, alpha, sgp), alpha_pos, beta_pos })
}

pub(crate) fn beta_of(sigma_g: f64, alpha: f64, sigma_gp: f64) -> f64 {
    oplus_unchecked(oplus_unchecked(sigma_g * sigma_g, alpha * alpha), sigma_gp * sigma_gp).sqrt()
}

pub fn expansivity_factors(g: &Matrix, gp: &Matrix, tau: &Signature, tol_gap: f64) -> Result<ExpansivityFactors> {
    let lg = log_svd(g)?;
    let lgp = log_svd(gp)?;
    for l in [&lg, &lgp] {
        let s: Vec<f64> = l.log_s.iter().map(|x| x.exp()).collect();
        check_invertible(&s)?;
    }
    expansivity_from_svds(&lg, &lgp, tau, tol_gap)
}

/// ‖π_v − π_u‖ for unit vectors, as the operator norm of v vᵀ − u uᵀ.
pub fn projection_difference_norm(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
    }
    if (norm(u) - 1.0).abs() > 1e-12 || (norm(v) - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit);
    }
    let n = u.len();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = v[i] * v[j] - u[i] * u[j];
        }
    }
    Ok(singular_values(&d)?[0])
}

/// Largest deviation of the frame from orthonormality.
pub fn frame_defect(f: &Flag) -> f64 {
    let g = &f.frame.transpose() * &f.frame;
    g.sub(&Matrix::identity(f.frame.cols())).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(theta: f64) -> Subspace {
        Subspace::from_orthonormal(Matrix::from_rows(&[&[theta.cos()], &[theta.sin()]]))
    }

    #[test]
    fn line_examples() {
        let t = 0.4;
        assert!((grassmann_correlation(&line(0.0), &line(t)).unwrap() - t.cos()).abs() < 1e-15);
        assert_eq!(grassmann_distance(&line(0.3), &line(0.3)).unwrap(), 0.0);
        assert!((grassmann_distance(&line(0.0), &line(FRAC_PI_2)).unwrap() - 1.0).abs() < 1e-15);
        assert!((grassmann_distance(&line(0.0), &line(FRAC_PI_2 / 2.0)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tiny_angle_is_resolved() {
        let d = grassmann_distance(&line(0.0), &line(1e-12)).unwrap();
        assert!((d - 1e-12 / FRAC_PI_2).abs() < 1e-20);
    }

    #[test]
    fn rotated_first_component() {
        // τ = (1,2) in R^3: rotate F_1 by 30° inside F_2 = span(e1, e2)
        let tau = Signature::new(&[1, 2], 3).unwrap();
        let f = Flag::standard(tau.clone());
        let t = core::f64::consts::PI / 6.0;
        let g = Flag::from_frame(tau, &Matrix::from_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()], &[0.0, 0.0]])).unwrap();
        let m = flag_metrics(&f, &g).unwrap();
        assert!((m.d - 1.0 / 3.0).abs() < 1e-14);
        assert!((m.alpha - t.cos()).abs() < 1e-14);
    }

    #[test]
    fn ominus_basic() {
        let w = Subspace::from_orthonormal(Matrix::identity(3));
        let v = Subspace::from_orthonormal(Matrix::identity(3).leading_cols(1));
        let r = ominus(&v, &w).unwrap();
        assert_eq!(r.dim(), 2);
        assert!(r.project(&[1.0, 0.0, 0.0]).iter().all(|x| x.abs() < 1e-15));
        assert_eq!(ominus(&w, &w).unwrap().dim(), 0);
        assert!(matches!(ominus(&w, &v), Err(Error::NotNested)));
    }

    #[test]
    fn expansivity_examples() {
        let tau = Signature::new(&[1], 2).unwrap();
        let g = Matrix::from_diag(&[4.0, 1.0]);
        let e = expansivity_factors(&g, &g, &tau, 1e-8).unwrap();
        assert!((e.alpha - 1.0).abs() < 1e-15 && (e.beta - 1.0).abs() < 1e-15);
        let gp = Matrix::from_diag(&[1.0, 4.0]);
        let e = expansivity_factors(&g, &gp, &tau, 1e-8).unwrap();
        assert!(e.alpha < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let u = [1.0, 0.0];
        let t: f64 = core::f64::consts::PI / 6.0;
        assert!(projection_difference_norm(&u, &u).unwrap() < 1e-15);
        assert!((projection_difference_norm(&u, &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((projection_difference_norm(&u, &[t.cos(), t.sin()]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(projection_difference_norm(&u, &[2.0, 0.0]), Err(Error::NotUnit)));
    }

    #[test]
    fn no_gap_is_reported() {
        let tau = Signature::new(&[1], 3).unwrap();
        let r = most_expanding_flags(&Matrix::from_diag(&[2.0, 2.0, 1.0]), &tau, 1e-8);
        assert!(matches!(r, Err(Error::NoGap { index: 1, .. })));
    }
}
