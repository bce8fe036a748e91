//! Cocycle families: Jacobi (band Schrödinger) transfer matrices, almost
//! Mathieu, realification of complex cocycles, random trigonometric
//! cocycles and a small gallery of named fixtures.
//!
//! Transfer-matrix convention. For the operator
//! `(Hψ)_n = −(W_{n+1} ψ_{n+1} + W_nᵀ ψ_{n−1} + R_n ψ_n) + λ D_n ψ_n`
//! with `W_n(x) = W(x + nω)` and similarly for `R`, `D`, the equation
//! `Hψ = Eψ` solved for `ψ_{n+1}` reads
//! `ψ_{n+1} = W_{n+1}⁻¹ [(λ D_n − R_n − E) ψ_n − W_nᵀ ψ_{n−1}]`.
//! Hence `(ψ_{n+1}, ψ_n) = A(x + nω) (ψ_n, ψ_{n−1})` with
//! `A(y) = [[W(y+ω)⁻¹ (λ D(y) − R(y) − E), −W(y+ω)⁻¹ W(y)ᵀ], [I, 0]]`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cocycle::{Cocycle, ComplexCocycle, Frequency, QuadratureGrid, TrigPoly};
use crate::error::{Error, Result};
use crate::linalg::svd::check_invertible;
use crate::linalg::{singular_values, CMatrix, Matrix};
use crate::par::map_indexed;

/// Strip width used when a constructor does not take one.
pub const DEFAULT_WIDTH: f64 = 0.5;
/// Symmetry tolerance for R and D on the grid.
const TOL_SYM: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct JacobiData {
    band: usize,
    w: Cocycle,
    r: Cocycle,
    dpot: Cocycle,
    pub lambda: f64,
    pub energy: f64,
}

impl JacobiData {
    /// W, R, D are band×band trigonometric maps (row-major entries) sharing
    /// the torus dimension of `freq`; their own frequencies are ignored.
    pub fn new(
        band: usize,
        w: Vec<TrigPoly>,
        r: Vec<TrigPoly>,
        d: Vec<TrigPoly>,
        lambda: f64,
        energy: f64,
        freq: &Frequency,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !energy.is_finite() {
            return Err(Error::Domain(format!("need lambda > 0 and finite E, got {lambda}, {energy}")));
        }
        let mk = |e: Vec<TrigPoly>| Cocycle::trig(band, freq.clone(), DEFAULT_WIDTH, e);
        let data = JacobiData { band, w: mk(w)?, r: mk(r)?, dpot: mk(d)?, lambda, energy };
        let grid = QuadratureGrid::new(64, freq.d())?;
        for i in 0..grid.len() {
            let x = grid.point(i);
            for (name, c) in [("R", &data.r), ("D", &data.dpot)] {
                let v = c.eval_real(&x);
                if v.sub(&v.transpose()).max_abs() > TOL_SYM * v.max_abs().max(1.0) {
                    return Err(Error::InvalidCocycle(format!("{name}(x) is not symmetric at x = {x:?}")));
                }
            }
            let s = singular_values(&data.w.eval_real(&x))?;
            check_invertible(&s).map_err(|_| Error::InvalidCocycle(format!("W(x) is not invertible at x = {x:?}")))?;
        }
        Ok(data)
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn w(&self) -> &Cocycle {
        &self.w
    }
    pub fn r(&self) -> &Cocycle {
        &self.r
    }
    pub fn d(&self) -> &Cocycle {
        &self.dpot
    }

    fn shifted(x: &[f64], omega: &[f64]) -> Vec<f64> {
        x.iter().zip(omega).map(|(a, b)| a + b).collect()
    }

    pub(crate) fn eval_real(&self, x: &[f64], omega: &[f64]) -> Matrix {
        let b = self.band;
        let wn = self.w.eval_real(&Self::shifted(x, omega));
        // validated invertible on the torus; a failure here means a caller
        // bypassed validation, so propagate NaNs rather than panic
        let winv = wn.inverse().unwrap_or_else(|_| Matrix::from_vec(b, b, vec![f64::NAN; b * b]));
        let mut pot = self.dpot.eval_real(x).scale(self.lambda).sub(&self.r.eval_real(x));
        for i in 0..b {
            pot.data_mut()[i * b + i] -= self.energy;
        }
        let top_left = winv.matmul(&pot);
        let top_right = winv.matmul(&self.w.eval_real(x).transpose()).scale(-1.0);
        let mut a = Matrix::zeros(2 * b, 2 * b);
        for i in 0..b {
            for j in 0..b {
                a.data_mut()[i * 2 * b + j] = top_left[(i, j)];
                a.data_mut()[i * 2 * b + b + j] = top_right[(i, j)];
            }
            a.data_mut()[(b + i) * 2 * b + i] = 1.0;
        }
        a
    }

    pub(crate) fn eval_complex(&self, z: &[Complex64], omega: &[f64]) -> Result<CMatrix> {
        let b = self.band;
        let zs: Vec<Complex64> = z.iter().zip(omega).map(|(a, w)| a + w).collect();
        let winv = self.w.eval_complex_raw(&zs).inverse()?;
        let mut pot = self
            .dpot
            .eval_complex_raw(z)
            .scale(Complex64::new(self.lambda, 0.0))
            .add(&self.r.eval_complex_raw(z).scale(Complex64::new(-1.0, 0.0)));
        for i in 0..b {
            pot.data_mut()[i * b + i] -= self.energy;
        }
        let tl = winv.matmul(&pot);
        let tr = winv.matmul(&self.w.eval_complex_raw(z).transpose()).scale(Complex64::new(-1.0, 0.0));
        let mut a = CMatrix::zeros(2 * b, 2 * b);
        for i in 0..b {
            for j in 0..b {
                a.data_mut()[i * 2 * b + j] = tl.data()[i * b + j];
                a.data_mut()[i * 2 * b + b + j] = tr.data()[i * b + j];
            }
            a.data_mut()[(b + i) * 2 * b + i] = Complex64::new(1.0, 0.0);
        }
        Ok(a)
    }
}

/// Transfer cocycle of the Jacobi operator, of dimension 2·band. W must be
/// invertible on the sampled strip of width `r`.
pub fn jacobi_cocycle(data: JacobiData, omega: Frequency, r: f64) -> Result<Cocycle> {
    if omega.d() != data.w.d() {
        return Err(Error::DimensionMismatch { expected: data.w.d(), found: omega.d() });
    }
    let w = data.w.with_width(r)?;
    let grid = QuadratureGrid::new(64, omega.d())?;
    let offsets = [-r, 0.0, r];
    let ok = map_indexed(grid.len() * 3, |idx| {
        let x = grid.point(idx / 3);
        let z: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, offsets[idx % 3])).collect();
        w.eval_complex_raw(&z).inverse().is_ok()
    });
    if ok.iter().any(|b| !b) {
        return Err(Error::InvalidCocycle("W is not invertible on the strip".into()));
    }
    Cocycle::jacobi(data, omega, r)
}

/// [[2λ cos 2πx − E, −1], [1, 0]] with the default strip width.
pub fn almost_mathieu(lambda: f64, energy: f64, omega: Frequency) -> Result<Cocycle> {
    if !(lambda > 0.0 && lambda.is_finite()) || !energy.is_finite() {
        return Err(Error::Domain(format!("need lambda > 0 and finite E, got {lambda}, {energy}")));
    }
    if omega.d() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: omega.d() });
    }
    let entries = vec![
        TrigPoly::cos(&[1], 2.0 * lambda).add(&TrigPoly::constant(1, -energy)),
        TrigPoly::constant(1, -1.0),
        TrigPoly::constant(1, 1.0),
        TrigPoly::zero(),
    ];
    Cocycle::trig(2, omega, DEFAULT_WIDTH, entries)
}

/// Entrywise realification: each complex entry f becomes [[Re f, −Im f], [Im f, Re f]],
/// with Re f and Im f expanded as real trigonometric polynomials.
pub fn realify_cocycle(a: &ComplexCocycle) -> Result<Cocycle> {
    let m = a.m();
    let half = Complex64::new(0.5, 0.0);
    let mut entries = vec![TrigPoly::zero(); 4 * m * m];
    for i in 0..m {
        for j in 0..m {
            let f = &a.entries()[i * m + j];
            let fc = f.conj_reflect();
            let re = f.add(&fc).scale(half);
            let im = f.add(&fc.scale(Complex64::new(-1.0, 0.0))).scale(Complex64::new(0.0, -0.5));
            let at = |r: usize, c: usize| r * 2 * m + c;
            entries[at(2 * i, 2 * j)] = re.clone();
            entries[at(2 * i, 2 * j + 1)] = im.scale(Complex64::new(-1.0, 0.0));
            entries[at(2 * i + 1, 2 * j)] = im;
            entries[at(2 * i + 1, 2 * j + 1)] = re;
        }
    }
    Cocycle::trig(2 * m, a.frequency().clone(), a.r(), entries)
}

/// Modes k with ‖k‖₁ ≤ degree, one from each ±k pair (k = 0 included).
fn half_modes(d: usize, degree: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut k = vec![0i64; d];
    fn rec(k: &mut [i64], pos: usize, budget: i64, out: &mut Vec<Vec<i64>>) {
        if pos == k.len() {
            let first = k.iter().find(|v| **v != 0);
            if first.is_none_or(|v| *v > 0) {
                out.push(k.to_vec());
            }
            return;
        }
        for v in -budget..=budget {
            k[pos] = v;
            rec(k, pos + 1, budget - v.abs(), out);
        }
        k[pos] = 0;
    }
    rec(&mut k, 0, degree, &mut out);
    out
}

/// Random real trigonometric cocycle: each entry is a sum over modes
/// ‖k‖₁ ≤ degree of Gaussian cos and sin amplitudes scaled by `amplitude`.
pub fn random_trig_cocycle<R: Rng>(rng: &mut R, m: usize, freq: Frequency, r: f64, degree: i64, amplitude: f64) -> Result<Cocycle> {
    let modes = half_modes(freq.d(), degree);
    let d = freq.d();
    let entries = (0..m * m)
        .map(|_| {
            let mut p = TrigPoly::zero();
            for k in &modes {
                let a: f64 = rng.sample(StandardNormal);
                if k.iter().all(|v| *v == 0) {
                    p = p.add(&TrigPoly::constant(d, amplitude * a));
                } else {
                    let b: f64 = rng.sample(StandardNormal);
                    p = p.add(&TrigPoly::cos(k, amplitude * a)).add(&TrigPoly::sin(k, amplitude * b));
                }
            }
            p
        })
        .collect();
    Cocycle::trig(m, freq, r, entries)
}

/// Random complex trigonometric cocycle with Gaussian coefficients on all
/// modes ‖k‖₁ ≤ degree, plus `shift`·I.
pub fn random_complex_cocycle<R: Rng>(
    rng: &mut R,
    m: usize,
    freq: Frequency,
    r: f64,
    degree: i64,
    amplitude: f64,
    shift: f64,
) -> Result<ComplexCocycle> {
    let d = freq.d();
    let mut modes = half_modes(d, degree);
    let neg: Vec<Vec<i64>> = modes.iter().filter(|k| k.iter().any(|v| *v != 0)).map(|k| k.iter().map(|v| -v).collect()).collect();
    modes.extend(neg);
    let entries = (0..m * m)
        .map(|idx| {
            let mut p = TrigPoly::zero();
            for k in &modes {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                p = p.add(&TrigPoly::mode(k, Complex64::new(amplitude * re, amplitude * im)));
            }
            if idx % (m + 1) == 0 {
                p = p.add(&TrigPoly::constant(d, shift));
            }
            p
        })
        .collect();
    ComplexCocycle::new(m, freq, r, entries)
}

pub const GALLERY: [&str; 5] = ["const-diag", "rotation", "diag-dominant-gap", "am-lambda3", "torus2d-demo"];

/// Named fixtures.
///
/// * `const-diag`: diag(4, 2, 1), r = 1.
/// * `rotation`: rotation by angle 2πx, r = 0.5.
/// * `diag-dominant-gap`: diag(4, 2, 1) + 0.1·M(x) with a fixed non-commuting
///   trigonometric M, r = 0.5.
/// * `am-lambda3`: almost Mathieu, λ = 3, E = 0, r = 0.5.
/// * `torus2d-demo`: a 2×2 cocycle over a translation of the 2-torus, r = 0.25.
///
/// All one-dimensional fixtures use the golden-mean frequency; the torus
/// fixture uses (golden mean, √2 − 1).
pub fn sample_gallery(name: &str) -> Result<Cocycle> {
    let g = Frequency::golden;
    match name {
        "const-diag" => Cocycle::constant(&Matrix::from_diag(&[4.0, 2.0, 1.0]), g(), 1.0),
        "rotation" => {
            let e = vec![TrigPoly::cos(&[1], 1.0), TrigPoly::sin(&[1], -1.0), TrigPoly::sin(&[1], 1.0), TrigPoly::cos(&[1], 1.0)];
            Cocycle::trig(2, g(), 0.5, e)
        }
        "diag-dominant-gap" => {
            let c = |k: i64| TrigPoly::cos(&[k], 0.1);
            let s = |k: i64| TrigPoly::sin(&[k], 0.1);
            let k1 = |a: f64| TrigPoly::constant(1, a);
            let e = vec![k1(4.0).add(&c(1)), s(1), c(2), s(2), k1(2.0).add(&c(1)), s(1), c(2), s(1), k1(1.0).add(&c(1))];
            Cocycle::trig(3, g(), 0.5, e)
        }
        "am-lambda3" => almost_mathieu(3.0, 0.0, g()),
        "torus2d-demo" => {
            let freq = Frequency::new(&[crate::cocycle::golden_mean(), 2f64.sqrt() - 1.0])?;
            let e = vec![
                TrigPoly::constant(2, 2.0).add(&TrigPoly::cos(&[1, 0], 0.5)),
                TrigPoly::sin(&[0, 1], 0.3),
                TrigPoly::cos(&[1, 1], 0.3),
                TrigPoly::constant(2, 0.5).add(&TrigPoly::cos(&[0, 1], 0.1)),
            ];
            Cocycle::trig(2, freq, 0.25, e)
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// Names accepted by [`sample_gallery`].
pub fn gallery_names() -> Vec<String> {
    GALLERY.iter().map(|s| s.to_string()).collect()
}
