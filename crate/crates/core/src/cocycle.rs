//! Analytic quasiperiodic cocycles on the torus: representation, evaluation on
//! the complex strip, stable iteration, finite-scale averages over a uniform
//! grid, strip norms, large deviations and Diophantine checks.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::svd::check_invertible;
use crate::linalg::{exterior_power, singular_values, CMatrix, Matrix, ScaledProduct, SvFormula, TOL_INV};
use crate::models::JacobiData;
use crate::par::{map_indexed, mean};

/// Tolerance for conjugate symmetry of Fourier coefficients.
pub const TOL_SYMMETRY: f64 = 1e-14;
/// Slack allowed on |Im z| ≤ r.
const STRIP_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    omega: Vec<f64>,
}

impl Frequency {
    pub fn new(omega: &[f64]) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Domain("frequency needs at least one component".into()));
        }
        if omega.iter().any(|w| !w.is_finite() || *w < 0.0 || *w >= 1.0) {
            return Err(Error::Domain(format!("frequency components must lie in [0,1): {omega:?}")));
        }
        Ok(Frequency { omega: omega.to_vec() })
    }

    /// (√5 − 1)/2.
    pub fn golden() -> Self {
        Frequency { omega: vec![golden_mean()] }
    }

    pub fn d(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }
}

pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Uniform grid with nodes i/N in every coordinate; node indices run with the
/// last coordinate fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureGrid {
    n: usize,
    d: usize,
}

impl QuadratureGrid {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 2 || d == 0 {
            return Err(Error::Domain(format!("grid needs N >= 2 and d >= 1, got N = {n}, d = {d}")));
        }
        if (n as f64).powi(d as i32) > 1e9 {
            return Err(Error::Domain("grid too large".into()));
        }
        Ok(QuadratureGrid { n, d })
    }

    pub fn per_dim(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.d];
        let mut rest = idx;
        for c in (0..self.d).rev() {
            x[c] = (rest % self.n) as f64 / self.n as f64;
            rest /= self.n;
        }
        x
    }
}

/// One Fourier mode c·e^{2πi k·x}.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub k: Vec<i64>,
    pub coeff: Complex64,
}

/// Finite Fourier series on the d-torus.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrigPoly {
    pub terms: Vec<Term>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly { terms: Vec::new() }
    }

    pub fn constant(d: usize, a: f64) -> Self {
        TrigPoly { terms: vec![Term { k: vec![0; d], coeff: Complex64::new(a, 0.0) }] }
    }

    /// a·cos(2π k·x)
    pub fn cos(k: &[i64], a: f64) -> Self {
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        let half = Complex64::new(a / 2.0, 0.0);
        TrigPoly { terms: vec![Term { k: k.to_vec(), coeff: half }, Term { k: neg, coeff: half }] }
    }

    /// a·sin(2π k·x)
    pub fn sin(k: &[i64], a: f64) -> Self {
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        TrigPoly {
            terms: vec![Term { k: k.to_vec(), coeff: Complex64::new(0.0, -a / 2.0) }, Term { k: neg, coeff: Complex64::new(0.0, a / 2.0) }],
        }
    }

    /// c·e^{2πi k·x}
    pub fn mode(k: &[i64], c: Complex64) -> Self {
        TrigPoly { terms: vec![Term { k: k.to_vec(), coeff: c }] }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        TrigPoly { terms }.merged()
    }

    pub fn scale(&self, c: Complex64) -> TrigPoly {
        TrigPoly { terms: self.terms.iter().map(|t| Term { k: t.k.clone(), coeff: t.coeff * c }).collect() }
    }

    /// Combine repeated modes; zero coefficients are dropped.
    pub fn merged(&self) -> TrigPoly {
        let mut map: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for t in &self.terms {
            *map.entry(t.k.clone()).or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
        }
        TrigPoly { terms: map.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).map(|(k, coeff)| Term { k, coeff }).collect() }
    }

    /// The function x ↦ conj(f(x)) on the real torus.
    pub fn conj_reflect(&self) -> TrigPoly {
        TrigPoly { terms: self.terms.iter().map(|t| Term { k: t.k.iter().map(|v| -v).collect(), coeff: t.coeff.conj() }).collect() }
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut phase = Complex64::new(0.0, 0.0);
            for (kc, zc) in t.k.iter().zip(z) {
                phase += *zc * (*kc as f64);
            }
            s += t.coeff * (Complex64::new(0.0, 2.0 * PI) * phase).exp();
        }
        s
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms.first().map(|t| t.k.len())
    }

    /// Largest |c_{−k} − conj(c_k)|, relative to max(1, |c_k|).
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.merged();
        let map: BTreeMap<Vec<i64>, Complex64> = m.terms.iter().map(|t| (t.k.clone(), t.coeff)).collect();
        let mut worst: f64 = 0.0;
        for (k, c) in &map {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            let other = map.get(&neg).copied().unwrap_or(Complex64::new(0.0, 0.0));
            worst = worst.max((other - c.conj()).norm() / c.norm().max(1.0));
        }
        worst
    }

    pub fn max_degree(&self) -> i64 {
        self.terms.iter().map(|t| t.k.iter().map(|v| v.abs()).sum::<i64>()).max().unwrap_or(0)
    }
}

/// Mode table shared by all entries: each distinct k evaluated once per point.
#[derive(Clone, Debug)]
struct ModeTable {
    modes: Vec<Vec<i64>>,
    entries: Vec<Vec<(usize, Complex64)>>,
}

impl ModeTable {
    fn build(entries: &[TrigPoly]) -> Self {
        let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        let mut modes = Vec::new();
        let mut table = Vec::with_capacity(entries.len());
        for e in entries {
            let mut row = Vec::with_capacity(e.terms.len());
            for t in &e.terms {
                let id = *index.entry(t.k.clone()).or_insert_with(|| {
                    modes.push(t.k.clone());
                    modes.len() - 1
                });
                row.push((id, t.coeff));
            }
            table.push(row);
        }
        ModeTable { modes, entries: table }
    }

    fn eval_real(&self, m: usize, x: &[f64]) -> Matrix {
        let cs: Vec<(f64, f64)> = self
            .modes
            .iter()
            .map(|k| {
                let mut th = 0.0;
                for (kc, xc) in k.iter().zip(x) {
                    th += *kc as f64 * xc;
                }
                let th = 2.0 * PI * (th - th.floor());
                (th.cos(), th.sin())
            })
            .collect();
        let data: Vec<f64> = self.entries.iter().map(|row| row.iter().map(|(id, c)| c.re * cs[*id].0 - c.im * cs[*id].1).sum()).collect();
        Matrix::from_vec(m, m, data)
    }

    fn eval_complex(&self, m: usize, z: &[Complex64]) -> CMatrix {
        let ph: Vec<Complex64> = self
            .modes
            .iter()
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (kc, zc) in k.iter().zip(z) {
                    re += *kc as f64 * zc.re;
                    im += *kc as f64 * zc.im;
                }
                let re = re - re.floor();
                Complex64::from_polar((-2.0 * PI * im).exp(), 2.0 * PI * re)
            })
            .collect();
        let data: Vec<Complex64> = self.entries.iter().map(|row| row.iter().map(|(id, c)| c * ph[*id]).sum()).collect();
        CMatrix::from_vec(m, m, data)
    }
}

#[derive(Clone, Debug)]
enum Body {
    Trig { entries: Vec<TrigPoly>, table: ModeTable },
    Jacobi(Box<JacobiData>),
}

/// A real analytic cocycle (T, A) with T the translation by ω and A given
/// either by trigonometric-polynomial entries or by a Jacobi transfer
/// matrix built from such entries.
#[derive(Clone, Debug)]
pub struct Cocycle {
    m: usize,
    freq: Frequency,
    r: f64,
    body: Body,
}

fn check_entries(m: usize, d: usize, entries: &[TrigPoly]) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidCocycle("dimension must be positive".into()));
    }
    if entries.len() != m * m {
        return Err(Error::InvalidCocycle(format!("expected {} entries, found {}", m * m, entries.len())));
    }
    for (i, e) in entries.iter().enumerate() {
        for t in &e.terms {
            if t.k.len() != d {
                return Err(Error::InvalidCocycle(format!("entry {i}: mode {:?} does not have {d} components", t.k)));
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidCocycle(format!("entry {i}: non-finite coefficient")));
            }
        }
    }
    Ok(())
}

impl Cocycle {
    /// Real trigonometric-polynomial cocycle; `entries` is row-major m×m.
    pub fn trig(m: usize, freq: Frequency, r: f64, entries: Vec<TrigPoly>) -> Result<Self> {
        check_entries(m, freq.d(), &entries)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidCocycle(format!("strip width must be positive, got {r}")));
        }
        for (i, e) in entries.iter().enumerate() {
            let defect = e.symmetry_defect();
            if defect > TOL_SYMMETRY {
                return Err(Error::InvalidCocycle(format!(
                    "entry ({}, {}) is not real on the torus (symmetry defect {defect:.3e})",
                    i / m,
                    i % m
                )));
            }
        }
        let table = ModeTable::build(&entries);
        Ok(Cocycle { m, freq, r, body: Body::Trig { entries, table } })
    }

    /// Constant cocycle A(x) = g.
    pub fn constant(g: &Matrix, freq: Frequency, r: f64) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::DimensionMismatch { expected: g.rows(), found: g.cols() });
        }
        let d = freq.d();
        let entries = g.as_slice().iter().map(|&a| if a == 0.0 { TrigPoly::zero() } else { TrigPoly::constant(d, a) }).collect();
        Self::trig(g.rows(), freq, r, entries)
    }

    pub(crate) fn jacobi(data: JacobiData, freq: Frequency, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidCocycle(format!("strip width must be positive, got {r}")));
        }
        Ok(Cocycle { m: 2 * data.band(), freq, r, body: Body::Jacobi(Box::new(data)) })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.freq.d()
    }

    pub fn frequency(&self) -> &Frequency {
        &self.freq
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Fourier entries, for trigonometric-polynomial cocycles.
    pub fn entries(&self) -> Option<&[TrigPoly]> {
        match &self.body {
            Body::Trig { entries, .. } => Some(entries),
            Body::Jacobi(_) => None,
        }
    }

    pub fn jacobi_data(&self) -> Option<&JacobiData> {
        match &self.body {
            Body::Jacobi(j) => Some(j),
            Body::Trig { .. } => None,
        }
    }

    pub fn with_frequency(&self, freq: Frequency) -> Result<Self> {
        if freq.d() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), found: freq.d() });
        }
        let mut c = self.clone();
        c.freq = freq;
        Ok(c)
    }

    pub fn with_width(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidCocycle(format!("strip width must be positive, got {r}")));
        }
        let mut c = self.clone();
        c.r = r;
        Ok(c)
    }

    /// A + h·B for trigonometric-polynomial cocycles of equal shape.
    pub fn perturbed(&self, dir: &Cocycle, h: f64) -> Result<Cocycle> {
        let (Some(a), Some(b)) = (self.entries(), dir.entries()) else {
            return Err(Error::InvalidCocycle("perturbations need trigonometric-polynomial entries".into()));
        };
        if self.m != dir.m || self.d() != dir.d() {
            return Err(Error::DimensionMismatch { expected: self.m, found: dir.m });
        }
        let entries = a.iter().zip(b).map(|(p, q)| p.add(&q.scale(Complex64::new(h, 0.0)))).collect();
        Cocycle::trig(self.m, self.freq.clone(), self.r, entries)
    }

    /// c·A
    pub fn scaled(&self, c: f64) -> Result<Cocycle> {
        let Some(a) = self.entries() else {
            return Err(Error::InvalidCocycle("scaling needs trigonometric-polynomial entries".into()));
        };
        let entries = a.iter().map(|p| p.scale(Complex64::new(c, 0.0))).collect();
        Cocycle::trig(self.m, self.freq.clone(), self.r, entries)
    }

    /// A(x) for x on the real torus.
    pub fn eval_real(&self, x: &[f64]) -> Matrix {
        match &self.body {
            Body::Trig { table, .. } => table.eval_real(self.m, x),
            Body::Jacobi(j) => j.eval_real(x, self.freq.omega()),
        }
    }

    /// Complex evaluation of a trigonometric cocycle without strip checks.
    pub(crate) fn eval_complex_raw(&self, z: &[Complex64]) -> CMatrix {
        match &self.body {
            Body::Trig { table, .. } => table.eval_complex(self.m, z),
            Body::Jacobi(j) => j
                .eval_complex(z, self.freq.omega())
                .unwrap_or_else(|_| CMatrix::from_vec(self.m, self.m, vec![Complex64::new(f64::NAN, 0.0); self.m * self.m])),
        }
    }

    fn eval_complex_unchecked(&self, z: &[Complex64]) -> Result<CMatrix> {
        match &self.body {
            Body::Trig { table, .. } => Ok(table.eval_complex(self.m, z)),
            Body::Jacobi(j) => j.eval_complex(z, self.freq.omega()),
        }
    }

    /// T^i x.
    pub fn orbit_point(&self, x: &[f64], i: usize) -> Vec<f64> {
        x.iter()
            .zip(self.freq.omega())
            .map(|(xc, w)| {
                let t = xc + i as f64 * w;
                t - t.floor()
            })
            .collect()
    }

    /// Check numerical invertibility on the grid; fails at the first bad node.
    pub fn validate_on(&self, grid: &QuadratureGrid) -> Result<()> {
        if grid.d() != self.d() {
            return Err(Error::GridMismatch);
        }
        let res = map_indexed(grid.len(), |i| {
            let x = grid.point(i);
            let s = singular_values(&self.eval_real(&x))?;
            check_invertible(&s).map_err(|_| Error::SingularOnTorus { point: x })
        });
        res.into_iter().collect()
    }
}

/// A(z) on the strip |Im z_i| ≤ r.
pub fn eval_cocycle(a: &Cocycle, z: &[Complex64]) -> Result<CMatrix> {
    if z.len() != a.d() {
        return Err(Error::DimensionMismatch { expected: a.d(), found: z.len() });
    }
    if z.iter().any(|c| c.im.abs() > a.r * (1.0 + STRIP_SLACK)) {
        return Err(Error::OutsideStrip);
    }
    a.eval_complex_unchecked(z)
}

/// Complex-valued trigonometric-polynomial cocycle (no symmetry imposed).
#[derive(Clone, Debug)]
pub struct ComplexCocycle {
    m: usize,
    freq: Frequency,
    r: f64,
    entries: Vec<TrigPoly>,
    table: ModeTable,
}

impl ComplexCocycle {
    pub fn new(m: usize, freq: Frequency, r: f64, entries: Vec<TrigPoly>) -> Result<Self> {
        check_entries(m, freq.d(), &entries)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidCocycle(format!("strip width must be positive, got {r}")));
        }
        let table = ModeTable::build(&entries);
        Ok(ComplexCocycle { m, freq, r, entries, table })
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn frequency(&self) -> &Frequency {
        &self.freq
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn entries(&self) -> &[TrigPoly] {
        &self.entries
    }

    pub fn eval(&self, z: &[Complex64]) -> CMatrix {
        self.table.eval_complex(self.m, z)
    }

    pub fn eval_real(&self, x: &[f64]) -> CMatrix {
        let z: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.eval(&z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripNorms {
    /// ‖A‖_r
    pub norm_a: f64,
    /// ‖A⁻¹‖_r
    pub norm_ainv: f64,
    /// C(A)
    pub c_a: f64,
}

impl StripNorms {
    /// c(A) = C(A)^{-2}
    pub fn c_small(&self) -> f64 {
        1.0 / (self.c_a * self.c_a)
    }

    /// log‖A‖_r + log‖A⁻¹‖_r
    pub fn log_spread(&self) -> f64 {
        self.norm_a.ln() + self.norm_ainv.ln()
    }

    /// max(|log‖A‖_r|, |log‖A⁻¹‖_r|)
    pub fn log_size(&self) -> f64 {
        self.norm_a.ln().abs().max(self.norm_ainv.ln().abs())
    }
}

/// C(A) = m(m+1)/r · (|log‖A‖_r| + |log‖A⁻¹‖_r| + log(1 + ‖A‖_r)).
pub fn scaling_constant(m: usize, r: f64, norm_a: f64, norm_ainv: f64) -> f64 {
    (m * (m + 1)) as f64 / r * (norm_a.ln().abs() + norm_ainv.ln().abs() + norm_a.ln_1p())
}

/// Imaginary offsets {−r, 0, r}^d: both boundary faces and the real torus.
fn strip_offsets(d: usize, r: f64) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * 3);
        for o in &out {
            for v in [-r, 0.0, r] {
                let mut p = o.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn strip_extremes(a: &Cocycle, grid: &QuadratureGrid, need_inverse: bool) -> Result<(f64, f64)> {
    if grid.d() != a.d() {
        return Err(Error::GridMismatch);
    }
    let offsets = strip_offsets(a.d(), a.r);
    let per = grid.len();
    let res = map_indexed(per * offsets.len(), |idx| -> Result<(f64, f64)> {
        let (o, i) = (idx / per, idx % per);
        let x = grid.point(i);
        let z: Vec<Complex64> = x.iter().zip(&offsets[o]).map(|(re, im)| Complex64::new(*re, *im)).collect();
        let g = a.eval_complex_unchecked(&z).map_err(|_| Error::SingularOnTorus { point: x.clone() })?;
        let s = g.singular_values()?;
        let top = s[0];
        let low = *s.last().unwrap();
        if need_inverse && (low == 0.0 || low < TOL_INV * top) {
            return Err(Error::SingularOnTorus { point: x });
        }
        Ok((top, if low > 0.0 { 1.0 / low } else { f64::INFINITY }))
    });
    let mut na: f64 = 0.0;
    let mut ni: f64 = 0.0;
    for r in res {
        let (t, i) = r?;
        na = na.max(t);
        ni = ni.max(i);
    }
    Ok((na, ni))
}

/// ‖A‖_r and ‖A⁻¹‖_r by sampling Im z ∈ {−r, 0, r}^d over the grid, plus C(A).
pub fn strip_norms(a: &Cocycle, grid: &QuadratureGrid) -> Result<StripNorms> {
    let (norm_a, norm_ainv) = strip_extremes(a, grid, true)?;
    Ok(StripNorms { norm_a, norm_ainv, c_a: scaling_constant(a.m, a.r, norm_a, norm_ainv) })
}

/// sup ‖A(z)‖ over the sampled strip; A need not be invertible.
pub fn strip_sup_norm(a: &Cocycle, grid: &QuadratureGrid) -> Result<f64> {
    Ok(strip_extremes(a, grid, false)?.0)
}

/// Quick invertibility screen: |det| ≥ tol·‖g‖_F^m implies s_m ≥ tol·s_1.
fn invertible_on_orbit(g: &Matrix, step: usize) -> Result<()> {
    let m = g.rows() as i32;
    let f = g.frobenius_norm();
    let det = g.det().abs();
    if f > 0.0 && det >= TOL_INV * f.powi(m) {
        return Ok(());
    }
    let s = singular_values(g)?;
    check_invertible(&s).map_err(|_| Error::SingularOnOrbit { step })
}

/// log p_j(A^{(n)}(x)) by iterating ∧_j A with one scalar rescaling per step.
pub fn iterate_logp(a: &Cocycle, x: &[f64], n: usize, j: usize) -> Result<f64> {
    if j == 0 || j > a.m {
        return Err(Error::Domain(format!("j = {j} outside 1..={}", a.m)));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let mut prod: Option<Matrix> = None;
    let mut log_scale = 0.0;
    for i in 0..n {
        let g = a.eval_real(&a.orbit_point(x, i));
        invertible_on_orbit(&g, i)?;
        let w = exterior_power(&g, j);
        let next = match prod {
            None => w,
            Some(p) => w.matmul(&p),
        };
        let s = next.max_abs();
        log_scale += s.ln();
        prod = Some(next.scale(1.0 / s));
    }
    let top = singular_values(&prod.unwrap())?[0];
    Ok(log_scale + top.ln())
}

/// A^{(n)}(x) in graded form.
pub fn iterate_product(a: &Cocycle, x: &[f64], n: usize) -> Result<ScaledProduct> {
    let mut p = ScaledProduct::identity(a.m);
    for i in 0..n {
        let g = a.eval_real(&a.orbit_point(x, i));
        invertible_on_orbit(&g, i)?;
        p.push(&g);
    }
    Ok(p)
}

/// Log singular values of A^{(n)}(x) at every requested scale, from a
/// single pass along the orbit. `scales` must be increasing.
pub fn iterate_log_sv(a: &Cocycle, x: &[f64], scales: &[usize]) -> Result<Vec<Vec<f64>>> {
    check_scales(scales)?;
    let mut p = ScaledProduct::identity(a.m);
    let mut out = Vec::with_capacity(scales.len());
    let mut next = 0;
    for i in 0..*scales.last().unwrap() {
        let g = a.eval_real(&a.orbit_point(x, i));
        invertible_on_orbit(&g, i)?;
        p.push(&g);
        while next < scales.len() && scales[next] == i + 1 {
            out.push(p.log_svd()?.log_s);
            next += 1;
        }
    }
    Ok(out)
}

pub(crate) fn check_scales(scales: &[usize]) -> Result<()> {
    if scales.is_empty() || scales[0] == 0 || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(format!("scales must be positive and increasing: {scales:?}")));
    }
    Ok(())
}

fn first_error<T>(res: Vec<Result<T>>) -> Result<Vec<T>> {
    res.into_iter().collect()
}

/// Per-node log singular values at every scale: [node][scale][j].
pub fn grid_log_sv(a: &Cocycle, scales: &[usize], grid: &QuadratureGrid) -> Result<Vec<Vec<Vec<f64>>>> {
    if grid.d() != a.d() {
        return Err(Error::GridMismatch);
    }
    check_scales(scales)?;
    first_error(map_indexed(grid.len(), |i| iterate_log_sv(a, &grid.point(i), scales)))
}

/// (1/n) log s(A^{(n)}(x)) at every grid node.
pub fn grid_values(a: &Cocycle, s: &SvFormula, n: usize, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    s.validate(a.m)?;
    let ls = grid_log_sv(a, &[n], grid)?;
    Ok(ls.iter().map(|v| s.log_value(&v[0]) / n as f64).collect())
}

/// Λ_s^{(n)}(A): grid average of (1/n) log s(A^{(n)}(x)).
pub fn finite_scale_average(a: &Cocycle, s: &SvFormula, n: usize, grid: &QuadratureGrid) -> Result<f64> {
    Ok(mean(&grid_values(a, s, n, grid)?))
}

/// Λ_{p_j}^{(n)} for every j and every scale: [scale][j−1].
pub fn finite_scale_blocks(a: &Cocycle, scales: &[usize], grid: &QuadratureGrid) -> Result<Vec<Vec<f64>>> {
    let ls = grid_log_sv(a, scales, grid)?;
    let m = a.m;
    let mut out = Vec::with_capacity(scales.len());
    for (si, &n) in scales.iter().enumerate() {
        let mut row = Vec::with_capacity(m);
        for j in 1..=m {
            let vals: Vec<f64> = ls.iter().map(|v| v[si][..j].iter().sum::<f64>() / n as f64).collect();
            row.push(mean(&vals));
        }
        out.push(row);
    }
    Ok(out)
}

/// Grid value of ∫ log|det A|.
pub fn log_det_integral(a: &Cocycle, grid: &QuadratureGrid) -> Result<f64> {
    if grid.d() != a.d() {
        return Err(Error::GridMismatch);
    }
    let vals = map_indexed(grid.len(), |i| a.eval_real(&grid.point(i)).log_abs_det());
    Ok(mean(&vals))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlmostInvariance {
    /// max over the grid of |u_n(Tx) − u_n(x)|
    pub max_gap: f64,
    /// m(m+1)·(log‖A‖_r + log‖A⁻¹‖_r)/n
    pub bound: f64,
}

pub fn almost_invariance(a: &Cocycle, s: &SvFormula, n: usize, grid: &QuadratureGrid) -> Result<AlmostInvariance> {
    s.validate(a.m)?;
    if grid.d() != a.d() {
        return Err(Error::GridMismatch);
    }
    let norms = strip_norms(a, grid)?;
    let gaps = first_error(map_indexed(grid.len(), |i| -> Result<f64> {
        let x = grid.point(i);
        let lx = iterate_product(a, &x, n)?.log_svd()?;
        let ltx = iterate_product(a, &a.orbit_point(&x, 1), n)?.log_svd()?;
        Ok((s.log_value(&ltx.log_s) - s.log_value(&lx.log_s)).abs() / n as f64)
    }))?;
    let m = a.m as f64;
    Ok(AlmostInvariance { max_gap: gaps.into_iter().fold(0.0, f64::max), bound: m * (m + 1.0) * norms.log_spread() / n as f64 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub n: usize,
    pub formula: SvFormula,
    pub delta: f64,
    /// Fraction of grid nodes where |(1/n) log s − Λ_s^{(n)}| > δ.
    pub measure: f64,
    pub average: f64,
    /// c(A) = C(A)^{-2}
    pub c: f64,
    /// e^{−c δ³ n}; reference only.
    pub bound_reference: f64,
}

pub fn ldt_deviation(a: &Cocycle, s: &SvFormula, n: usize, delta: f64, grid: &QuadratureGrid) -> Result<DeviationReport> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let norms = strip_norms(a, grid)?;
    let vals = grid_values(a, s, n, grid)?;
    Ok(deviation_from_values(&vals, s, n, delta, norms.c_small()))
}

pub(crate) fn deviation_from_values(vals: &[f64], s: &SvFormula, n: usize, delta: f64, c: f64) -> DeviationReport {
    let average = mean(vals);
    let bad = vals.iter().filter(|v| (*v - average).abs() > delta).count();
    DeviationReport {
        n,
        formula: s.clone(),
        delta,
        measure: bad as f64 / vals.len() as f64,
        average,
        c,
        bound_reference: (-c * delta.powi(3) * n as f64).exp(),
    }
}

/// max over the grid of |(1/n) log s(A^{(n)}) − (1/n) log s(B^{(n)})|.
pub fn finite_scale_difference(a: &Cocycle, b: &Cocycle, s: &SvFormula, n: usize, grid: &QuadratureGrid) -> Result<f64> {
    let va = grid_values(a, s, n, grid)?;
    let vb = grid_values(b, s, n, grid)?;
    Ok(va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiophantineReport {
    pub holds: bool,
    pub worst_k: Vec<i64>,
    /// min over scanned k of ‖k·ω‖ divided by the right-hand side; ≥ 1 iff the condition holds.
    pub worst_ratio: f64,
}

fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Scan 2 ≤ |k| ≤ k_max. In one dimension the strong condition
/// ‖kω‖ ≥ t/(|k| (log |k|)²) is tested; for d ≥ 2 the standard condition
/// ‖k·ω‖ ≥ t/|k|^{d+1} with |k| the ℓ¹ norm, over half the lattice (k and −k
/// give the same value).
pub fn diophantine_check(omega: &Frequency, t: f64, k_max: usize) -> Result<DiophantineReport> {
    if k_max < 2 {
        return Err(Error::Domain("K_max must be at least 2".into()));
    }
    let d = omega.d();
    let w = omega.omega();
    let mut worst_ratio = f64::INFINITY;
    let mut worst_k = vec![0i64; d];
    if d == 1 {
        for k in 2..=k_max {
            let kf = k as f64;
            let rhs = t / (kf * kf.ln().powi(2));
            let ratio = dist_to_int(kf * w[0]) / rhs;
            if ratio < worst_ratio {
                worst_ratio = ratio;
                worst_k = vec![k as i64];
            }
        }
    } else {
        let mut k = vec![0i64; d];
        scan_half_lattice(&mut k, 0, k_max as i64, &mut |k: &[i64]| {
            let norm: i64 = k.iter().map(|v| v.abs()).sum();
            if norm < 2 {
                return;
            }
            let dot: f64 = k.iter().zip(w).map(|(a, b)| *a as f64 * b).sum();
            let rhs = t / (norm as f64).powi(d as i32 + 1);
            let ratio = dist_to_int(dot) / rhs;
            if ratio < worst_ratio {
                worst_ratio = ratio;
                worst_k = k.to_vec();
            }
        });
    }
    Ok(DiophantineReport { holds: worst_ratio >= 1.0, worst_k, worst_ratio })
}

/// Visit each k with ‖k‖₁ ≤ budget whose first nonzero entry is positive.
fn scan_half_lattice(k: &mut [i64], pos: usize, budget: i64, f: &mut dyn FnMut(&[i64])) {
    if pos == k.len() {
        if k.iter().find(|v| **v != 0).is_some_and(|v| *v > 0) {
            f(k);
        }
        return;
    }
    let leading_zero = k[..pos].iter().all(|v| *v == 0);
    let lo = if leading_zero { 0 } else { -budget };
    for v in lo..=budget {
        k[pos] = v;
        scan_half_lattice(k, pos + 1, budget - v.abs(), f);
    }
    k[pos] = 0;
}
