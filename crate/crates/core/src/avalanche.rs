//! Chains of matrices: the avalanche estimates, the inequality sandwiches for
//! norms and block products, the shadowing lemma, and projective contraction.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::flags::{
    beta_of, component_metrics, critical_distance, flag_action_unchecked, flag_distance, flag_metrics, flags_from_svd, Flag,
};
use crate::linalg::svd::check_invertible;
use crate::linalg::{log_svd, LogSvd, Matrix, ScaledProduct, Signature, SvFormula, TOL_GAP};
use crate::random::{random_flag, random_orthogonal, random_plane_rotation};

/// Default ratio for the admissibility test κ ≤ ratio·ε².
pub const ADMISSIBLE_RATIO: f64 = 0.01;
/// α factors below this make the sandwich bounds vacuous.
pub const ALPHA_FLOOR: f64 = 1e-12;

/// g_0, …, g_{n−1} with the SVDs of each factor and of every partial product
/// g^{(i)} = g_{i−1} ⋯ g_0, i = 1..n.
#[derive(Clone, Debug)]
pub struct Chain {
    mats: Vec<Matrix>,
    tau: Signature,
    svds: Vec<LogSvd>,
    partial: Vec<LogSvd>,
    tol_gap: f64,
}

impl Chain {
    pub fn new(mats: Vec<Matrix>, tau: Signature) -> Result<Self> {
        Self::with_tolerance(mats, tau, TOL_GAP)
    }

    pub fn with_tolerance(mats: Vec<Matrix>, tau: Signature, tol_gap: f64) -> Result<Self> {
        if mats.len() < 2 {
            return Err(Error::Domain(format!("a chain needs at least two matrices, got {}", mats.len())));
        }
        let m = tau.ambient();
        for g in &mats {
            if !g.is_square() || g.rows() != m {
                return Err(Error::DimensionMismatch { expected: m, found: g.rows() });
            }
        }
        let svds = mats.iter().map(log_svd).collect::<Result<Vec<_>>>()?;
        let mut prod = ScaledProduct::identity(m);
        let mut partial = Vec::with_capacity(mats.len());
        for g in &mats {
            prod.push(g);
            partial.push(prod.log_svd()?);
        }
        Ok(Chain { mats, tau, svds, partial, tol_gap })
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn signature(&self) -> &Signature {
        &self.tau
    }

    pub fn factor_svd(&self, i: usize) -> &LogSvd {
        &self.svds[i]
    }

    /// SVD of g^{(i)} for 1 ≤ i ≤ n.
    pub fn partial_svd(&self, i: usize) -> &LogSvd {
        &self.partial[i - 1]
    }

    /// SVD of g_i g_{i−1}.
    fn pair_svd(&self, i: usize) -> Result<LogSvd> {
        ScaledProduct::from_matrices(self.tau.ambient(), [&self.mats[i - 1], &self.mats[i]]).log_svd()
    }

    fn factor_flags(&self, i: usize) -> Result<(Flag, Flag)> {
        flags_from_svd(&self.svds[i], &self.tau, self.tol_gap).map_err(|e| match e {
            Error::NoGap { ratio, .. } => Error::NoGap { index: i, ratio },
            other => other,
        })
    }
}

fn log_p(l: &LogSvd, j: usize) -> f64 {
    l.log_s[..j].iter().sum()
}

fn log_sigma_tau(l: &LogSvd, tau: &Signature) -> f64 {
    tau.positions().iter().map(|&i| l.log_s[i] - l.log_s[i - 1]).fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApHypotheses {
    /// max_i σ_τ(g_i)
    pub kappa: f64,
    /// min over i, j of ‖∧_{τ_j}(g_i g_{i−1})‖ / (‖∧_{τ_j} g_i‖ ‖∧_{τ_j} g_{i−1}‖)
    pub epsilon: f64,
    /// min_i α_τ(g_{i−1}, g_i), the angle form of the second hypothesis.
    pub alpha_min: f64,
    pub admissible: bool,
}

pub fn ap_hypotheses(c: &Chain) -> Result<ApHypotheses> {
    ap_hypotheses_with(c, ADMISSIBLE_RATIO)
}

pub fn ap_hypotheses_with(c: &Chain, ratio: f64) -> Result<ApHypotheses> {
    let mut log_kappa = f64::NEG_INFINITY;
    for i in 0..c.len() {
        let s: Vec<f64> = c.svds[i].log_s.iter().map(|x| x.exp()).collect();
        check_invertible(&s)?;
        c.factor_flags(i)?;
        log_kappa = log_kappa.max(log_sigma_tau(&c.svds[i], &c.tau));
    }
    let mut log_eps = f64::INFINITY;
    let mut alpha_min: f64 = 1.0;
    for i in 1..c.len() {
        let pair = c.pair_svd(i)?;
        for &t in c.tau.positions() {
            let r = log_p(&pair, t) - log_p(&c.svds[i], t) - log_p(&c.svds[i - 1], t);
            log_eps = log_eps.min(r);
        }
        let (_, vplus_prev) = c.factor_flags(i - 1)?;
        let (vminus, _) = c.factor_flags(i)?;
        alpha_min = alpha_min.min(flag_metrics(&vplus_prev, &vminus)?.alpha);
    }
    let kappa = log_kappa.exp();
    let epsilon = log_eps.exp();
    Ok(ApHypotheses { kappa, epsilon, alpha_min, admissible: kappa <= ratio * epsilon * epsilon })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApReport {
    pub hypotheses: ApHypotheses,
    pub n: usize,
    /// d(v̂₊(g^{(n)}), v̂₊(g_{n−1}))
    pub d_plus: f64,
    /// d(v̂₋(g^{(n)}), v̂₋(g_0))
    pub d_minus: f64,
    /// log σ_τ(g^{(n)})
    pub log_sigma_n: f64,
    /// n · log(κ(1+ε)/ε²)
    pub log_sigma_bound: f64,
    /// The same bound with ε replaced by the angle form α_min.
    pub log_sigma_bound_alpha: f64,
    /// (π, |log π(g^{(n)}) + Σ_{i=1}^{n−2} log π(g_i) − Σ_{i=1}^{n−1} log π(g_i g_{i−1})|)
    pub delta_pi: Vec<(SvFormula, f64)>,
    /// d_plus / (κ/ε²)
    pub ratio_plus: f64,
    /// d_minus / (κ/ε²)
    pub ratio_minus: f64,
    /// max Δ_π / (n κ/ε²)
    pub ratio_delta: f64,
}

impl ApReport {
    pub fn sigma_n(&self) -> f64 {
        self.log_sigma_n.exp()
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_pi.iter().map(|d| d.1).fold(0.0, f64::max)
    }
}

pub fn ap_report(c: &Chain) -> Result<ApReport> {
    let hyp = ap_hypotheses(c)?;
    let n = c.len();
    let fin = c.partial_svd(n);
    let (vm_n, vp_n) = flags_from_svd(fin, &c.tau, c.tol_gap).map_err(|_| Error::ProductDegenerate)?;
    let (_, vp_last) = c.factor_flags(n - 1)?;
    let (vm_first, _) = c.factor_flags(0)?;
    let d_plus = flag_distance(&vp_n, &vp_last)?;
    let d_minus = flag_distance(&vm_n, &vm_first)?;
    let log_sigma_n = log_sigma_tau(fin, &c.tau);
    let (kappa, eps) = (hyp.kappa, hyp.epsilon);
    let log_sigma_bound = n as f64 * (kappa * (1.0 + eps) / (eps * eps)).ln();
    let a = hyp.alpha_min;
    let log_sigma_bound_alpha = n as f64 * (kappa * (1.0 + a) / (a * a)).ln();

    let mut formulas = Vec::new();
    for j in 1..=c.tau.len() {
        formulas.push(SvFormula::BlockProduct(c.tau.clone(), j));
    }
    for &t in c.tau.positions() {
        formulas.push(SvFormula::TopProduct(t));
    }
    let pairs = (1..n).map(|i| c.pair_svd(i)).collect::<Result<Vec<_>>>()?;
    let mut delta_pi = Vec::with_capacity(formulas.len());
    for f in formulas {
        let mut v = f.log_value(&fin.log_s);
        for i in 1..n - 1 {
            v += f.log_value(&c.svds[i].log_s);
        }
        for p in &pairs {
            v -= f.log_value(&p.log_s);
        }
        delta_pi.push((f, v.abs()));
    }
    let unit = kappa / (eps * eps);
    let dmax = delta_pi.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(ApReport {
        hypotheses: hyp,
        n,
        d_plus,
        d_minus,
        log_sigma_n,
        log_sigma_bound,
        log_sigma_bound_alpha,
        delta_pi,
        ratio_plus: d_plus / unit,
        ratio_minus: d_minus / unit,
        ratio_delta: dmax / (n as f64 * unit),
    })
}

/// Bounds and value in log form: log lower ≤ log actual ≤ log upper.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sandwich {
    pub log_lower: f64,
    pub log_actual: f64,
    pub log_upper: f64,
}

impl Sandwich {
    pub fn lower(&self) -> f64 {
        self.log_lower.exp()
    }
    pub fn actual(&self) -> f64 {
        self.log_actual.exp()
    }
    pub fn upper(&self) -> f64 {
        self.log_upper.exp()
    }

    /// Both inequalities hold up to the relative slack `rel`.
    pub fn holds(&self, rel: f64) -> bool {
        self.log_lower <= self.log_actual + rel && self.log_actual <= self.log_upper + rel
    }
}

/// α and β of the pair (g^{(i)}, g_i) at gap position `t`.
fn pair_factors_at(c: &Chain, i: usize, t: usize) -> Result<(f64, f64)> {
    let tau_t = Signature::new(&[t], c.tau.ambient())?;
    let lp = c.partial_svd(i);
    let lg = &c.svds[i];
    let (_, vplus) = flags_from_svd(lp, &tau_t, c.tol_gap)?;
    let (vminus, _) = flags_from_svd(lg, &tau_t, c.tol_gap).map_err(|e| match e {
        Error::NoGap { ratio, .. } => Error::NoGap { index: i, ratio },
        other => other,
    })?;
    let alpha = component_metrics(&vplus, &vminus)?[0].1;
    if alpha <= ALPHA_FLOOR {
        return Err(Error::AlphaDegenerate { alpha });
    }
    let sg = (lp.log_s[t] - lp.log_s[t - 1]).exp();
    let sgp = (lg.log_s[t] - lg.log_s[t - 1]).exp();
    Ok((alpha, beta_of(sg, alpha, sgp)))
}

/// Sandwich for π_{τ,j}(g^{(n)}) / Π π_{τ,j}(g_i), j = 1..k.
pub fn svp_sandwich(c: &Chain, j: usize) -> Result<Sandwich> {
    if j == 0 || j > c.tau.len() {
        return Err(Error::Domain(format!("block index {j} outside 1..={}", c.tau.len())));
    }
    let n = c.len();
    for i in 0..n {
        c.factor_flags(i)?;
    }
    let (hi, lo) = (c.tau.tau(j), c.tau.tau(j - 1));
    let f = SvFormula::BlockProduct(c.tau.clone(), j);
    let mut log_lower = 0.0;
    let mut log_upper = 0.0;
    for i in 1..n {
        let (a_hi, b_hi) = pair_factors_at(c, i, hi)?;
        let (a_lo, b_lo) = if lo == 0 { (1.0, 1.0) } else { pair_factors_at(c, i, lo)? };
        log_lower += a_hi.ln() - b_lo.ln();
        log_upper += b_hi.ln() - a_lo.ln();
    }
    let mut log_actual = f.log_value(&c.partial_svd(n).log_s);
    for l in &c.svds {
        log_actual -= f.log_value(&l.log_s);
    }
    Ok(Sandwich { log_lower, log_actual, log_upper })
}

/// Sandwich for ‖g^{(n)}‖ / Π ‖g_i‖ with α, β at the (1)-gap level.
pub fn norm_sandwich(c: &Chain) -> Result<Sandwich> {
    let n = c.len();
    let mut log_lower = 0.0;
    let mut log_upper = 0.0;
    for i in 1..n {
        let (a, b) = pair_factors_at(c, i, 1)?;
        log_lower += a.ln();
        log_upper += b.ln();
    }
    let mut log_actual = c.partial_svd(n).log_s[0];
    for l in &c.svds {
        log_actual -= l.log_s[0];
    }
    Ok(Sandwich { log_lower, log_actual, log_upper })
}

/// Chain with factors R_i · D · Q_i, where D has singular values κ^b on the
/// b-th block of τ (so σ_τ(g_i) = κ), and Q_i = S_iᵀ R_{i−1}ᵀ with S_i a
/// rotation by `angle` in a random plane: consecutive most expanding flags
/// then differ by S_i only.
pub fn admissible_chain<R: Rng>(rng: &mut R, tau: &Signature, n: usize, kappa: f64, angle: f64) -> Vec<Matrix> {
    let m = tau.ambient();
    let diag: Vec<f64> = (1..=m)
        .map(|i| {
            let b = tau.positions().iter().filter(|&&t| t < i).count();
            kappa.powi(b as i32)
        })
        .collect();
    let d = Matrix::from_diag(&diag);
    let mut out = Vec::with_capacity(n);
    let mut prev_r = random_orthogonal(rng, m);
    let mut q = random_orthogonal(rng, m);
    for i in 0..n {
        let r = random_orthogonal(rng, m);
        if i > 0 {
            let s = random_plane_rotation(rng, m, angle);
            q = &s.transpose() * &prev_r.transpose();
        }
        out.push(&(&r * &d) * &q);
        prev_r = r;
    }
    out
}

/// Outcome of the projective-contraction probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionProbe {
    pub sigma: f64,
    pub measured_lipschitz: f64,
    pub measured_image_radius: f64,
    /// σ(1+ε)/ε²
    pub lipschitz_bound: f64,
    /// σ/ε
    pub radius_bound: f64,
}

fn sample_outside<R: Rng, F: Fn(&Flag) -> bool>(rng: &mut R, tau: &Signature, accept: F, budget: usize) -> Result<Flag> {
    for _ in 0..budget {
        let f = random_flag(rng, tau);
        if accept(&f) {
            return Ok(f);
        }
    }
    Err(Error::SamplingExhausted)
}

/// Small random perturbation of a flag.
fn nudge<R: Rng>(rng: &mut R, f: &Flag, angle: f64) -> Result<Flag> {
    let s = random_plane_rotation(rng, f.signature().ambient(), angle);
    flag_action_unchecked(&s, f)
}

/// Lipschitz constant and image radius of φ_g measured on flags F with
/// α(F, v̂₋(g)) ≥ ε.
pub fn contraction_probe<R: Rng>(rng: &mut R, g: &Matrix, tau: &Signature, eps: f64, samples: usize) -> Result<ContractionProbe> {
    if samples < 2 {
        return Err(Error::Domain("at least two samples are needed".into()));
    }
    let l = log_svd(g)?;
    let s: Vec<f64> = l.log_s.iter().map(|x| x.exp()).collect();
    check_invertible(&s)?;
    let (vminus, vplus) = flags_from_svd(&l, tau, TOL_GAP)?;
    let sigma = log_sigma_tau(&l, tau).exp();
    if sigma >= eps * eps {
        return Err(Error::HypothesisFailed(format!("sigma_tau(g) = {sigma} is not below eps^2 = {}", eps * eps)));
    }
    let outside = |f: &Flag| flag_metrics(f, &vminus).map(|m| m.alpha >= eps).unwrap_or(false);
    let budget = 1000;
    let mut lip: f64 = 0.0;
    let mut radius: f64 = 0.0;
    for k in 0..samples {
        let f = sample_outside(rng, tau, outside, budget)?;
        let g_flag = if k % 2 == 0 {
            sample_outside(rng, tau, outside, budget)?
        } else {
            let a = 10f64.powf(rng.random_range(-4.0..-0.5));
            let mut cand = nudge(rng, &f, a)?;
            let mut tries = 0;
            while !outside(&cand) {
                tries += 1;
                if tries > budget {
                    return Err(Error::SamplingExhausted);
                }
                cand = nudge(rng, &f, a)?;
            }
            cand
        };
        let (gf, gg) = (flag_action_unchecked(g, &f)?, flag_action_unchecked(g, &g_flag)?);
        let d0 = flag_distance(&f, &g_flag)?;
        if d0 > 1e-9 {
            lip = lip.max(flag_distance(&gf, &gg)? / d0);
        }
        radius = radius.max(flag_distance(&gf, &vplus)?);
    }
    Ok(ContractionProbe {
        sigma,
        measured_lipschitz: lip,
        measured_image_radius: radius,
        lipschitz_bound: sigma * (1.0 + eps) / (eps * eps),
        radius_bound: sigma / eps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShadowParams {
    pub eps: f64,
    pub delta: f64,
    pub kappa: f64,
    /// Samples per map for hypotheses (c) and (d).
    pub samples: usize,
    /// Tolerance for the exact-equality hypotheses (a) and the first half of (b).
    pub tol: f64,
}

impl ShadowParams {
    /// Parameters derived for an avalanche chain as in the proof of the
    /// avalanche estimates: ε′ = ε/π, κ′ = κ(1+ε′)/ε′², δ = κ/ε′.
    pub fn for_chain(kappa: f64, eps: f64, samples: usize) -> Self {
        let e = eps / core::f64::consts::PI;
        ShadowParams { eps: e, delta: kappa / e, kappa: kappa * (1.0 + e) / (e * e), samples, tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointReport {
    pub distance: f64,
    pub bound: f64,
    pub iterations: usize,
    /// d(z_{k+1}, z_k) along the iteration.
    pub steps: Vec<f64>,
    /// Largest ratio of successive steps while they stay above round-off.
    pub max_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowReport {
    pub measured_lipschitz: f64,
    pub measured_radius: f64,
    pub min_exit_distance: f64,
    pub conclusion_distance: f64,
    pub conclusion_bound: f64,
    pub fixed_point: Option<FixedPointReport>,
}

fn apply_chain(maps: &[Matrix], f: &Flag) -> Result<Flag> {
    let mut cur = f.clone();
    for g in maps {
        cur = flag_action_unchecked(g, &cur)?;
    }
    Ok(cur)
}

/// Check the shadowing hypotheses for φ_{g_0}, …, φ_{g_{n−1}} on flags with
/// critical sets Σ_i = Σ(v̂₋(g_i)), then evaluate the conclusions.
pub fn shadow_verify<R: Rng>(
    rng: &mut R,
    maps: &[Matrix],
    tau: &Signature,
    pairs: &[(Flag, Flag)],
    p: &ShadowParams,
) -> Result<ShadowReport> {
    let n = maps.len();
    if pairs.len() != n || n == 0 {
        return Err(Error::Domain("one (x, y) pair per map is required".into()));
    }
    if !(p.delta / (1.0 - p.kappa) < p.eps && p.eps < 0.5 && p.delta < p.kappa && p.kappa < 1.0 && p.delta > 0.0) {
        return Err(Error::HypothesisFailed("parameters: need delta/(1-kappa) < eps < 1/2, delta < kappa < 1".into()));
    }
    let mut vminus = Vec::with_capacity(n);
    for g in maps {
        let l = log_svd(g)?;
        check_invertible(&l.log_s.iter().map(|x| x.exp()).collect::<Vec<_>>())?;
        vminus.push(flags_from_svd(&l, tau, TOL_GAP)?.0);
    }
    for (i, (x, y)) in pairs.iter().enumerate() {
        if flag_distance(&flag_action_unchecked(&maps[i], x)?, y)? > p.tol {
            return Err(Error::HypothesisFailed(format!("(a) at i = {i}")));
        }
        if critical_distance(&vminus[i], x)? < 1.0 - p.tol {
            return Err(Error::HypothesisFailed(format!("(b) d(x_i, Sigma_i) = 1 at i = {i}")));
        }
        if i + 1 < n && critical_distance(&vminus[i + 1], y)? < 2.0 * p.eps {
            return Err(Error::HypothesisFailed(format!("(b) d(y_i, Sigma_i+1) >= 2 eps at i = {i}")));
        }
    }
    let mut lip: f64 = 0.0;
    let mut radius: f64 = 0.0;
    let budget = 1000;
    for i in 0..n {
        let outside = |f: &Flag| critical_distance(&vminus[i], f).map(|d| d >= p.eps).unwrap_or(false);
        for k in 0..p.samples {
            let f = sample_outside(rng, tau, outside, budget)?;
            let img = flag_action_unchecked(&maps[i], &f)?;
            radius = radius.max(flag_distance(&img, &pairs[i].1)?);
            let a = 10f64.powf(rng.random_range(-4.0..-0.5));
            let other = if k % 2 == 0 { sample_outside(rng, tau, outside, budget)? } else { nudge(rng, &f, a)? };
            if !outside(&other) {
                continue;
            }
            let d0 = flag_distance(&f, &other)?;
            if d0 > 1e-9 {
                let d1 = flag_distance(&img, &flag_action_unchecked(&maps[i], &other)?)?;
                lip = lip.max(d1 / d0);
            }
        }
        if lip > p.kappa {
            return Err(Error::HypothesisFailed(format!("(c) measured Lipschitz {lip} > kappa at i = {i}")));
        }
        if radius > p.delta {
            return Err(Error::HypothesisFailed(format!("(d) measured image radius {radius} > delta at i = {i}")));
        }
    }
    let min_exit = (0..n.saturating_sub(1))
        .map(|i| critical_distance(&vminus[i + 1], &pairs[i].1))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(1.0, f64::min);

    let end = apply_chain(maps, &pairs[0].0)?;
    let conclusion_distance = flag_distance(&pairs[n - 1].1, &end)?;
    let conclusion_bound = p.delta / (1.0 - p.kappa);

    let fixed_point = if flag_distance(&pairs[0].0, &pairs[n - 1].1)? <= p.tol {
        let x0 = pairs[0].0.clone();
        let mut z = x0.clone();
        let mut steps = Vec::new();
        let mut iterations = 0;
        for _ in 0..200 {
            let next = apply_chain(maps, &z)?;
            let d = flag_distance(&next, &z)?;
            steps.push(d);
            z = next;
            iterations += 1;
            if d < 1e-15 {
                break;
            }
        }
        let max_rate = steps.windows(2).filter(|w| w[0] > 1e-12).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        Some(FixedPointReport {
            distance: flag_distance(&x0, &z)?,
            bound: p.delta / ((1.0 - p.kappa) * (1.0 - p.kappa.powi(n as i32))),
            iterations,
            steps,
            max_rate,
        })
    } else {
        None
    };
    Ok(ShadowReport {
        measured_lipschitz: lip,
        measured_radius: radius,
        min_exit_distance: min_exit,
        conclusion_distance,
        conclusion_bound,
        fixed_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    fn tau1() -> Signature {
        Signature::new(&[1], 2).unwrap()
    }

    #[test]
    fn commuting_diagonal_chain() {
        let g = Matrix::from_diag(&[100.0, 1.0]);
        let c = Chain::new(alloc::vec![g; 10], tau1()).unwrap();
        let h = ap_hypotheses(&c).unwrap();
        assert!((h.kappa - 0.01).abs() < 1e-16);
        assert!((h.epsilon - 1.0).abs() < 1e-14);
        let r = ap_report(&c).unwrap();
        assert_eq!(r.d_plus, 0.0);
        assert_eq!(r.d_minus, 0.0);
        assert!((r.log_sigma_n - (-20.0 * 10f64.ln())).abs() < 1e-10);
        assert!(r.delta_max() < 1e-12);
        let s = svp_sandwich(&c, 1).unwrap();
        assert!(s.log_lower.abs() < 1e-14 && s.log_actual.abs() < 1e-12 && s.log_upper.abs() < 1e-14);
    }

    #[test]
    fn alternating_conjugates_collapse_epsilon() {
        let a = Matrix::from_diag(&[100.0, 1.0]);
        let b = Matrix::from_diag(&[1.0, 100.0]);
        let c = Chain::new(alloc::vec![a.clone(), b.clone(), a, b], tau1()).unwrap();
        let h = ap_hypotheses(&c).unwrap();
        assert!((h.epsilon - 0.01).abs() < 1e-14);
        assert!(!h.admissible);
    }

    #[test]
    fn identity_in_chain_has_no_gap() {
        let c = Chain::new(alloc::vec![Matrix::from_diag(&[3.0, 1.0]), Matrix::identity(2)], tau1()).unwrap();
        assert!(matches!(ap_hypotheses(&c), Err(Error::NoGap { index: 1, .. })));
    }

    #[test]
    fn orthogonal_chain_norms() {
        let mut r = rng(3);
        let mats: Vec<Matrix> = (0..5).map(|_| random_orthogonal(&mut r, 3)).collect();
        let c = Chain::new(mats, Signature::new(&[1], 3).unwrap()).unwrap();
        // orthogonal factors have no gap, so the sandwich precondition fails
        assert!(matches!(norm_sandwich(&c), Err(Error::NoGap { .. })));
    }

    #[test]
    fn generator_controls_sigma() {
        let mut r = rng(5);
        let tau = Signature::new(&[1, 2], 3).unwrap();
        let mats = admissible_chain(&mut r, &tau, 6, 1e-3, 0.3);
        let c = Chain::new(mats, tau).unwrap();
        let h = ap_hypotheses(&c).unwrap();
        assert!((h.kappa - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn contraction_example() {
        let mut r = rng(11);
        let g = Matrix::from_diag(&[100.0, 1.0]);
        let p = contraction_probe(&mut r, &g, &tau1(), 0.5, 500).unwrap();
        assert!((p.lipschitz_bound - 0.06).abs() < 1e-15);
        assert!(p.measured_lipschitz <= p.lipschitz_bound);
        assert!(p.measured_image_radius <= p.radius_bound);
        let q = random_orthogonal(&mut r, 2);
        assert!(contraction_probe(&mut r, &q, &tau1(), 0.5, 10).is_err());
    }

    #[test]
    fn shadow_identical_hyperbolic_maps() {
        let mut r = rng(2);
        let g = Matrix::from_diag(&[100.0, 1.0]);
        let x = Flag::standard(tau1());
        let p = ShadowParams { eps: 0.3, delta: 0.01 / 0.3, kappa: 0.01 * 1.3 / 0.09, samples: 200, tol: 1e-12 };
        let rep = shadow_verify(&mut r, &[g.clone(), g.clone(), g], &tau1(), &alloc::vec![(x.clone(), x.clone()); 3], &p).unwrap();
        assert_eq!(rep.conclusion_distance, 0.0);
        let fp = rep.fixed_point.unwrap();
        assert_eq!(fp.distance, 0.0);
    }
}
