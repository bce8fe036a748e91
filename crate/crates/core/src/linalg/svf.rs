//! Singular-value formulas, gap patterns and the ⊕ operation.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;

use super::matrix::Matrix;
use super::svd::{check_invertible, log_svd};
use crate::error::{Error, Result};

pub const TOL_GAP: f64 = 1e-8;

/// Gap positions 1 ≤ τ_1 < … < τ_k < m (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    positions: Vec<usize>,
    m: usize,
}

impl Signature {
    pub fn new(positions: &[usize], m: usize) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidSignature("empty".into()));
        }
        if positions[0] < 1 {
            return Err(Error::InvalidSignature("positions start at 1".into()));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSignature(format!("not strictly increasing: {positions:?}")));
        }
        if *positions.last().unwrap() >= m {
            return Err(Error::InvalidSignature(format!("last position must be below m = {m}")));
        }
        Ok(Signature { positions: positions.to_vec(), m })
    }

    /// The full signature (1, 2, …, m−1).
    pub fn full(m: usize) -> Result<Self> {
        let p: Vec<usize> = (1..m).collect();
        Self::new(&p, m)
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn ambient(&self) -> usize {
        self.m
    }

    /// τ_j with τ_0 = 0; `j` in 0..=k.
    pub fn tau(&self, j: usize) -> usize {
        if j == 0 {
            0
        } else {
            self.positions[j - 1]
        }
    }

    /// Largest position τ_k: the frame width of a τ-flag.
    pub fn top(&self) -> usize {
        *self.positions.last().unwrap()
    }
}

/// An element of the family of singular-value formulas. Indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub enum SvFormula {
    /// s_j
    SingularValue(usize),
    /// p_j = s_1 ⋯ s_j
    TopProduct(usize),
    /// π_{τ,j} = p_{τ_j} / p_{τ_{j−1}}
    BlockProduct(Signature, usize),
    /// ρ_i = s_i / s_{i+1}
    RatioRho(usize),
    /// σ_i = s_{i+1} / s_i
    RatioSigma(usize),
}

impl SvFormula {
    pub fn validate(&self, m: usize) -> Result<()> {
        let ok = match self {
            SvFormula::SingularValue(j) | SvFormula::TopProduct(j) => (1..=m).contains(j),
            SvFormula::BlockProduct(t, j) => t.ambient() == m && (1..=t.len()).contains(j),
            SvFormula::RatioRho(i) | SvFormula::RatioSigma(i) => (1..m).contains(i),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("formula {self:?} out of range for m = {m}")))
        }
    }

    fn is_ratio(&self) -> bool {
        matches!(self, SvFormula::RatioRho(_) | SvFormula::RatioSigma(_))
    }

    /// Log value from log singular values sorted non-increasingly.
    pub fn log_value(&self, log_s: &[f64]) -> f64 {
        let p = |j: usize| -> f64 { log_s[..j].iter().sum() };
        match self {
            SvFormula::SingularValue(j) => log_s[j - 1],
            SvFormula::TopProduct(j) => p(*j),
            SvFormula::BlockProduct(t, j) => log_s[t.tau(j - 1)..t.tau(*j)].iter().sum(),
            SvFormula::RatioRho(i) => log_s[i - 1] - log_s[*i],
            SvFormula::RatioSigma(i) => log_s[*i] - log_s[i - 1],
        }
    }

    /// Every formula attached to dimension m and signature τ: all s_j, p_j,
    /// π_{τ,j}, and ρ/σ at the positions of τ.
    pub fn catalogue(tau: &Signature) -> Vec<SvFormula> {
        let m = tau.ambient();
        let mut out = Vec::new();
        for j in 1..=m {
            out.push(SvFormula::SingularValue(j));
            out.push(SvFormula::TopProduct(j));
        }
        for j in 1..=tau.len() {
            out.push(SvFormula::BlockProduct(tau.clone(), j));
        }
        for &i in tau.positions() {
            out.push(SvFormula::RatioRho(i));
            out.push(SvFormula::RatioSigma(i));
        }
        out
    }
}

/// Value of a singular-value formula on g.
pub fn eval_svf(f: &SvFormula, g: &Matrix) -> Result<f64> {
    Ok(eval_svf_log(f, g)?.exp())
}

pub fn eval_svf_log(f: &SvFormula, g: &Matrix) -> Result<f64> {
    f.validate(g.rows())?;
    let l = log_svd(g)?;
    if f.is_ratio() {
        let s: Vec<f64> = l.log_s.iter().map(|x| x.exp()).collect();
        check_invertible(&s)?;
    }
    Ok(f.log_value(&l.log_s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub rho_min: f64,
    pub sigma_max: f64,
    /// ρ_{τ_j} for j = 1..k.
    pub ratios: Vec<f64>,
    pub has_gap: bool,
}

impl GapReport {
    /// Report from log singular values; works for products whose ratios
    /// would overflow as plain floats.
    pub fn from_log_s(log_s: &[f64], tau: &Signature, tol_gap: f64) -> Self {
        let log_r: Vec<f64> = tau.positions().iter().map(|&i| log_s[i - 1] - log_s[i]).collect();
        let min_log = log_r.iter().copied().fold(f64::INFINITY, f64::min);
        GapReport {
            rho_min: min_log.exp(),
            sigma_max: (-min_log).exp(),
            ratios: log_r.iter().map(|x| x.exp()).collect(),
            has_gap: min_log > tol_gap.ln_1p(),
        }
    }

    /// Smallest log ratio, usable when `rho_min` overflows.
    pub fn log_rho_min(&self) -> f64 {
        self.ratios.iter().map(|r| r.ln()).fold(f64::INFINITY, f64::min)
    }
}

pub fn gap_report(g: &Matrix, tau: &Signature, tol_gap: f64) -> Result<GapReport> {
    if tau.ambient() != g.rows() {
        return Err(Error::DimensionMismatch { expected: tau.ambient(), found: g.rows() });
    }
    let l = log_svd(g)?;
    let s: Vec<f64> = l.log_s.iter().map(|x| x.exp()).collect();
    check_invertible(&s)?;
    Ok(GapReport::from_log_s(&l.log_s, tau, tol_gap))
}

/// a ⊕ b = a + b − ab on [0, 1].
pub fn oplus(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain(format!("oplus arguments must lie in [0,1], got {a}, {b}")));
    }
    Ok(oplus_unchecked(a, b))
}

#[inline]
pub(crate) fn oplus_unchecked(a: f64, b: f64) -> f64 {
    // (1 - b) a + b keeps the result inside [0, 1] in floating point
    (1.0 - b) * a + b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_validation() {
        assert!(Signature::new(&[1, 3], 4).is_ok());
        assert!(Signature::new(&[0, 1], 4).is_err());
        assert!(Signature::new(&[2, 2], 4).is_err());
        assert!(Signature::new(&[1, 4], 4).is_err());
        assert!(Signature::new(&[], 4).is_err());
        let t = Signature::new(&[1, 3], 4).unwrap();
        assert_eq!((t.tau(0), t.tau(1), t.tau(2)), (0, 1, 3));
    }

    #[test]
    fn block_products_on_diagonal() {
        let g = Matrix::from_diag(&[4.0, 2.0, 2.0, 1.0]);
        let t = Signature::new(&[1, 3], 4).unwrap();
        let pi1 = eval_svf(&SvFormula::BlockProduct(t.clone(), 1), &g).unwrap();
        let pi2 = eval_svf(&SvFormula::BlockProduct(t.clone(), 2), &g).unwrap();
        assert!((pi1 - 4.0).abs() < 1e-14 && (pi2 - 4.0).abs() < 1e-14);
        assert!((eval_svf(&SvFormula::RatioRho(1), &g).unwrap() - 2.0).abs() < 1e-14);
        assert!((eval_svf(&SvFormula::RatioRho(3), &g).unwrap() - 2.0).abs() < 1e-14);
        let r = gap_report(&g, &t, TOL_GAP).unwrap();
        assert!(r.has_gap);
        assert!((r.rho_min - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gap_report_degenerate() {
        let t1 = Signature::new(&[1], 3).unwrap();
        assert!(!gap_report(&Matrix::from_diag(&[2.0, 2.0, 1.0]), &t1, TOL_GAP).unwrap().has_gap);
        let id = gap_report(&Matrix::identity(3), &Signature::new(&[1, 2], 3).unwrap(), TOL_GAP).unwrap();
        assert!(!id.has_gap);
        assert_eq!(id.rho_min, 1.0);
    }

    #[test]
    fn sl2_sigma_is_inverse_norm_squared() {
        let g = Matrix::from_diag(&[5.0, 0.2]);
        let th: f64 = 0.7;
        let r = Matrix::from_rows(&[&[th.cos(), -th.sin()], &[th.sin(), th.cos()]]);
        let g = &(&r * &g) * &r.transpose();
        let s = eval_svf(&SvFormula::RatioSigma(1), &g).unwrap();
        assert!((s - 1.0 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_formulas_need_invertibility() {
        let g = Matrix::from_diag(&[1.0, 0.0]);
        assert!(matches!(eval_svf(&SvFormula::RatioRho(1), &g), Err(Error::SingularInput { .. })));
        assert!(eval_svf(&SvFormula::TopProduct(1), &g).is_ok());
    }

    #[test]
    fn oplus_examples() {
        assert_eq!(oplus(0.0, 0.37).unwrap(), 0.37);
        assert_eq!(oplus(1.0, 0.3).unwrap(), 1.0);
        assert_eq!(oplus(0.5, 0.5).unwrap(), 0.75);
        assert!(oplus(1.5, 0.0).is_err());
    }
}
