//! Lyapunov spectra at finite scales, gap detection, Oseledets filtrations,
//! the inductive-step ledger, convergence-rate fits, Hölder probes and the
//! pointwise/average gap lemma checks.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::cocycle::{
    check_scales, deviation_from_values, finite_scale_blocks, grid_log_sv, iterate_product, strip_norms, strip_sup_norm, Cocycle,
    DeviationReport, QuadratureGrid,
};
use crate::error::{Error, Result};
use crate::flags::{flag_distance, flags_from_svd, Flag};
use crate::linalg::{Signature, SvFormula, TOL_GAP};
use crate::par::{map_indexed, mean};

/// Slack for the subadditivity check Λ^{(kn)} ≤ Λ^{(n)}.
pub const SUBADDITIVITY_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEstimate {
    pub scales: Vec<usize>,
    /// Λ_{p_j}^{(n)}, indexed [scale][j−1].
    pub blocks: Vec<Vec<f64>>,
    /// L_j^{(n)} = Λ_{p_j}^{(n)} − Λ_{p_{j−1}}^{(n)}, indexed [scale][j−1].
    pub exponents: Vec<Vec<f64>>,
    /// L_j at the last scale.
    pub extrapolated: Vec<f64>,
    /// |L_j^{(n_last)} − L_j^{(n_ref)}| with n_ref = n_last/2 when available,
    /// otherwise the previous scale.
    pub uncertainty: Vec<f64>,
    /// Largest Λ_{p_j}^{(kn)} − Λ_{p_j}^{(n)} over scale pairs with n | kn.
    pub subadditivity_defect: f64,
    pub subadditive: bool,
}

impl SpectrumEstimate {
    pub fn m(&self) -> usize {
        self.extrapolated.len()
    }

    fn from_blocks(scales: &[usize], blocks: Vec<Vec<f64>>) -> Self {
        let exponents: Vec<Vec<f64>> =
            blocks.iter().map(|row| (0..row.len()).map(|j| row[j] - if j == 0 { 0.0 } else { row[j - 1] }).collect()).collect();
        let last = scales.len() - 1;
        let n_last = scales[last];
        let reference = scales.iter().position(|&n| 2 * n == n_last).unwrap_or(if last > 0 { last - 1 } else { 0 });
        let extrapolated = exponents[last].clone();
        let uncertainty = (0..extrapolated.len()).map(|j| (exponents[last][j] - exponents[reference][j]).abs()).collect();
        let mut defect = f64::NEG_INFINITY;
        for (a, &n) in scales.iter().enumerate() {
            for (b, &kn) in scales.iter().enumerate().skip(a + 1) {
                if kn % n == 0 {
                    for j in 0..blocks[a].len() {
                        defect = defect.max(blocks[b][j] - blocks[a][j]);
                    }
                }
            }
        }
        let defect = if defect == f64::NEG_INFINITY { 0.0 } else { defect };
        SpectrumEstimate {
            scales: scales.to_vec(),
            blocks,
            exponents,
            extrapolated,
            uncertainty,
            subadditivity_defect: defect,
            subadditive: defect <= SUBADDITIVITY_SLACK,
        }
    }
}

pub fn lyapunov_estimate(a: &Cocycle, scales: &[usize], grid: &QuadratureGrid) -> Result<SpectrumEstimate> {
    check_scales(scales)?;
    let blocks = finite_scale_blocks(a, scales, grid)?;
    Ok(SpectrumEstimate::from_blocks(scales, blocks))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockGap {
    /// Positions i with L_i − L_{i+1} > γ_min at the last two scales.
    pub positions: Vec<usize>,
    /// Λ_{π,j} for the k+1 blocks cut at those positions.
    pub blocks: Vec<f64>,
}

impl BlockGap {
    pub fn signature(&self, m: usize) -> Option<Signature> {
        Signature::new(&self.positions, m).ok()
    }
}

pub fn block_and_gap(est: &SpectrumEstimate, gamma_min: f64) -> Result<BlockGap> {
    let s = est.scales.len();
    if s < 2 {
        return Err(Error::Domain("gap detection needs at least two scales".into()));
    }
    let m = est.m();
    let positions: Vec<usize> =
        (1..m).filter(|&i| [s - 2, s - 1].iter().all(|&k| est.exponents[k][i - 1] - est.exponents[k][i] > gamma_min)).collect();
    let mut cuts = positions.clone();
    cuts.push(m);
    let mut blocks = Vec::with_capacity(cuts.len());
    let mut start = 0;
    for &c in &cuts {
        blocks.push(est.extrapolated[start..c].iter().sum());
        start = c;
    }
    Ok(BlockGap { positions, blocks })
}

#[derive(Clone, Debug)]
pub struct FiltrationField {
    pub tau: Signature,
    pub n: usize,
    pub grid: QuadratureGrid,
    /// v̂₋(A^{(n)}(x)) per node, `None` where the τ-gap fails.
    pub flags: Vec<Option<Flag>>,
    pub defined_fraction: f64,
}

pub fn oseledets_filtration_grid(a: &Cocycle, tau: &Signature, n: usize, grid: &QuadratureGrid) -> Result<FiltrationField> {
    if tau.ambient() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), found: tau.ambient() });
    }
    if grid.d() != a.d() {
        return Err(Error::GridMismatch);
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let res = map_indexed(grid.len(), |i| -> Result<Option<Flag>> {
        let l = iterate_product(a, &grid.point(i), n)?.log_svd()?;
        Ok(flags_from_svd(&l, tau, TOL_GAP).ok().map(|(vm, _)| vm))
    });
    let flags = res.into_iter().collect::<Result<Vec<_>>>()?;
    let defined = flags.iter().filter(|f| f.is_some()).count();
    Ok(FiltrationField { tau: tau.clone(), n, grid: *grid, defined_fraction: defined as f64 / flags.len() as f64, flags })
}

/// Grid average of flag distances; nodes undefined in either field count 1.
pub fn filtration_distance(f1: &FiltrationField, f2: &FiltrationField) -> Result<f64> {
    if f1.grid != f2.grid || f1.flags.len() != f2.flags.len() {
        return Err(Error::GridMismatch);
    }
    if f1.tau != f2.tau {
        return Err(Error::SignatureMismatch);
    }
    let d = f1
        .flags
        .iter()
        .zip(&f2.flags)
        .map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) => flag_distance(a, b),
            _ => Ok(1.0),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&d))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerState {
    pub gamma: f64,
    pub eta: f64,
    pub delta: f64,
    pub delta_bar: f64,
    pub c: f64,
    pub n0: f64,
    pub n1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerOutcome {
    pub gamma1: f64,
    pub eta1: f64,
    pub valid: bool,
    pub violations: Vec<String>,
}

/// One inductive step: γ₁ = γ₀ − 4η₀ − 9δ − C n₀/n₁ and η₁ = C n₀/n₁, with
/// the admissibility conditions on δ, δ̄ and n₁ checked (c = C^{-2}).
pub fn inductive_ledger(s: &LedgerState) -> LedgerOutcome {
    let ratio = s.n0 / s.n1;
    let eta1 = s.c * ratio;
    let gamma1 = s.gamma - 4.0 * s.eta - 9.0 * s.delta - eta1;
    let mut v = Vec::new();
    for (name, x) in [("gamma", s.gamma), ("eta", s.eta), ("delta", s.delta), ("C", s.c), ("n0", s.n0), ("n1", s.n1)] {
        if !(x > 0.0) {
            v.push(format!("{name} must be positive"));
        }
    }
    if !(s.gamma > 4.0 * s.eta) {
        v.push("gamma > 4 eta".into());
    }
    if !(s.delta < (s.gamma - 4.0 * s.eta) / 10.0) {
        v.push("delta < (gamma - 4 eta)/10".into());
    }
    if !(0.0 < s.delta_bar && s.delta_bar < s.delta) {
        v.push("0 < delta_bar < delta".into());
    }
    let c_small = 1.0 / (s.c * s.c);
    if !(s.n0.powf(-0.75) <= s.delta_bar && s.delta_bar <= c_small * s.delta.powi(3) / 2.0) {
        v.push("n0^(-3/4) <= delta_bar <= c delta^3 / 2".into());
    }
    if !(s.n1.ln() <= s.n0.ln() + s.delta_bar * s.n0) {
        v.push("n1 <= n0 exp(delta_bar n0)".into());
    }
    LedgerOutcome { gamma1, eta1, valid: v.is_empty(), violations: v }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformGaps {
    /// log n_k with n_{k+1} = n_k².
    pub log_scales: Vec<f64>,
    /// δ_k = n_k^{−1/6}
    pub deltas: Vec<f64>,
    /// δ̄_k = n_k^{−3/4}
    pub delta_bars: Vec<f64>,
    pub delta_sum: f64,
    /// 2 / n₀^{1/6}
    pub delta_bound: f64,
    /// Σ n_k / n_{k+1} = Σ 1/n_k
    pub ratio_sum: f64,
    /// 2 / n₀
    pub ratio_bound: f64,
}

pub fn uniform_gaps_schedule(n0: f64, terms: usize) -> Result<UniformGaps> {
    if !(n0 > 1.0) || terms == 0 {
        return Err(Error::Domain("need n0 > 1 and at least one term".into()));
    }
    let log_scales: Vec<f64> = (0..terms).map(|k| n0.ln() * 2f64.powi(k as i32)).collect();
    let deltas: Vec<f64> = log_scales.iter().map(|l| (-l / 6.0).exp()).collect();
    let delta_bars: Vec<f64> = log_scales.iter().map(|l| (-0.75 * l).exp()).collect();
    let inv: Vec<f64> = log_scales.iter().map(|l| (-l).exp()).collect();
    Ok(UniformGaps {
        delta_sum: deltas.iter().sum(),
        delta_bound: 2.0 / n0.powf(1.0 / 6.0),
        ratio_sum: inv.iter().sum(),
        ratio_bound: 2.0 / n0,
        log_scales,
        deltas,
        delta_bars,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    /// Scales used in the fit (n ≥ 2, below the largest).
    pub scales: Vec<usize>,
    /// |Λ_π^{(n)} − Λ_π^{(n_max)}|
    pub deviations: Vec<f64>,
    /// Least squares K in deviation ≈ K log n / n.
    pub k_fit: f64,
    /// Root mean square residual of that fit.
    pub residual: f64,
    /// Smallest K with deviation ≤ K log n / n at every fitted scale.
    pub k_envelope: f64,
    /// Least squares K in deviation ≈ K / n.
    pub k_inverse: f64,
    pub residual_inverse: f64,
    /// K_env log n / n lies above the fitted K/n curve at every fitted scale.
    pub envelope_dominates: bool,
}

fn ls_through_origin(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let k = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - k * a).powi(2)).sum();
    (k, (rss / x.len() as f64).sqrt())
}

pub fn rate_fit(a: &Cocycle, pi: &SvFormula, scales: &[usize], grid: &QuadratureGrid) -> Result<RateFit> {
    check_scales(scales)?;
    if scales.len() < 4 {
        return Err(Error::Domain("rate fit needs at least four scales".into()));
    }
    pi.validate(a.m())?;
    let ls = grid_log_sv(a, scales, grid)?;
    let lam: Vec<f64> =
        (0..scales.len()).map(|si| mean(&ls.iter().map(|v| pi.log_value(&v[si]) / scales[si] as f64).collect::<Vec<_>>())).collect();
    let top = *lam.last().unwrap();
    let mut used = Vec::new();
    let mut dev = Vec::new();
    for (si, &n) in scales[..scales.len() - 1].iter().enumerate() {
        if n >= 2 {
            used.push(n);
            dev.push((lam[si] - top).abs());
        }
    }
    if used.len() < 2 {
        return Err(Error::Domain("rate fit needs at least two scales n >= 2 below the largest".into()));
    }
    let xl: Vec<f64> = used.iter().map(|&n| (n as f64).ln() / n as f64).collect();
    let xi: Vec<f64> = used.iter().map(|&n| 1.0 / n as f64).collect();
    let (k_fit, residual) = ls_through_origin(&xl, &dev);
    let (k_inverse, residual_inverse) = ls_through_origin(&xi, &dev);
    let k_envelope = dev.iter().zip(&xl).map(|(y, x)| y / x).fold(0.0, f64::max);
    let envelope_dominates = xl.iter().zip(&xi).all(|(l, i)| k_envelope * l >= k_inverse * i);
    Ok(RateFit { scales: used, deviations: dev, k_fit, residual, k_envelope, k_inverse, residual_inverse, envelope_dominates })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderProbe {
    /// Radii kept in the fit, with |Λ_π(B_h) − Λ_π(A)|.
    pub radii: Vec<f64>,
    pub differences: Vec<f64>,
    /// Radii dropped because B_h lost the gap.
    pub gap_lost: Vec<f64>,
    pub theta: f64,
    pub r2: f64,
    /// Fewer than two positive differences: no slope can be fitted.
    pub degenerate: bool,
    /// ‖direction‖_r before normalization.
    pub direction_norm: f64,
}

/// Slope and R² of an unweighted least-squares line.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

/// Smallest mean log gap log ρ_{τ_j} over τ, from per-node log singular values.
fn min_mean_gap(ls: &[Vec<Vec<f64>>], tau: &Signature, n: usize) -> f64 {
    tau.positions()
        .iter()
        .map(|&i| mean(&ls.iter().map(|v| (v[0][i - 1] - v[0][i]) / n as f64).collect::<Vec<_>>()))
        .fold(f64::INFINITY, f64::min)
}

/// Λ_π at scale n_star for B_h = A + h·D/‖D‖_r, fitted as log|ΔΛ| against log h.
/// Perturbations whose average τ-gaps drop to `gamma_min` or below are dropped.
#[allow(clippy::too_many_arguments)]
pub fn holder_probe(
    a: &Cocycle,
    tau: &Signature,
    pi: &SvFormula,
    direction: &Cocycle,
    radii: &[f64],
    n_star: usize,
    grid: &QuadratureGrid,
    gamma_min: f64,
) -> Result<HolderProbe> {
    pi.validate(a.m())?;
    if tau.ambient() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), found: tau.ambient() });
    }
    if radii.is_empty() || radii.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let ls_a = grid_log_sv(a, &[n_star], grid)?;
    let gap_a = min_mean_gap(&ls_a, tau, n_star);
    if gap_a <= gamma_min {
        let worst = tau
            .positions()
            .iter()
            .copied()
            .find(|&i| mean(&ls_a.iter().map(|v| (v[0][i - 1] - v[0][i]) / n_star as f64).collect::<Vec<_>>()) <= gamma_min)
            .unwrap_or(tau.tau(1));
        return Err(Error::NoGap { index: worst, ratio: (gap_a * n_star as f64).exp() });
    }
    let lam = |ls: &[Vec<Vec<f64>>]| mean(&ls.iter().map(|v| pi.log_value(&v[0]) / n_star as f64).collect::<Vec<_>>());
    let base = lam(&ls_a);
    let dnorm = strip_sup_norm(direction, grid)?;
    let mut out = HolderProbe {
        radii: Vec::new(),
        differences: Vec::new(),
        gap_lost: Vec::new(),
        theta: 0.0,
        r2: 0.0,
        degenerate: true,
        direction_norm: dnorm,
    };
    if dnorm == 0.0 {
        out.radii = radii.to_vec();
        out.differences = vec![0.0; radii.len()];
        return Ok(out);
    }
    for &h in radii {
        let b = a.perturbed(direction, h / dnorm)?;
        let ls_b = grid_log_sv(&b, &[n_star], grid)?;
        if min_mean_gap(&ls_b, tau, n_star) <= gamma_min {
            out.gap_lost.push(h);
            continue;
        }
        out.radii.push(h);
        out.differences.push((lam(&ls_b) - base).abs());
    }
    let pts: Vec<(f64, f64)> = out.radii.iter().zip(&out.differences).filter(|(_, d)| **d > 0.0).map(|(h, d)| (h.ln(), d.ln())).collect();
    if pts.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let (theta, r2) = loglog_fit(&x, &y);
        out.theta = theta;
        out.r2 = r2;
        out.degenerate = false;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapCheck {
    pub position: usize,
    /// γ = Λ_ρ^{(n)}
    pub gamma: f64,
    pub deviation: DeviationReport,
    /// (i): min over good nodes of (1/n) log ρ − (γ − δ); positive means it holds.
    pub pointwise_margin: f64,
    pub pointwise_holds: bool,
    /// (ii) with γ̄ = γ − δ: the measured set B̄ and Λ_ρ − (γ̄ − C|B̄|).
    pub bad_fraction: f64,
    pub average_margin: f64,
    pub average_holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleCheck {
    pub block: usize,
    /// η slightly above |Λ_π^{(n)} − Λ_π^{(2n)}|
    pub eta: f64,
    pub bad_fraction: f64,
    /// min over good nodes of (1/n) log[π(A^{(2n)}) / (π(A^{(n)}) π(A^{(n)}∘T^n))] + 2η + 4δ
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaChecks {
    pub n: usize,
    pub delta: f64,
    pub scaling_constant: f64,
    pub gaps: Vec<GapCheck>,
    pub angles: Vec<AngleCheck>,
}

impl LemmaChecks {
    pub fn all_hold(&self) -> bool {
        self.gaps.iter().all(|g| g.pointwise_holds && g.average_holds) && self.angles.iter().all(|a| a.holds)
    }
}

/// Check the three grid-level implications relating pointwise and average
/// gaps and angles, with bad sets measured on the grid.
pub fn lemma_checks(a: &Cocycle, tau: &Signature, n: usize, delta: f64, grid: &QuadratureGrid) -> Result<LemmaChecks> {
    if tau.ambient() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), found: tau.ambient() });
    }
    if !(delta > 0.0) || n == 0 {
        return Err(Error::Domain("need delta > 0 and n >= 1".into()));
    }
    let norms = strip_norms(a, grid)?;
    let cst = norms.c_a;
    // per node: log s of A^{(n)}(x), A^{(2n)}(x) and A^{(n)}(T^n x)
    let per = map_indexed(grid.len(), |i| -> Result<[Vec<f64>; 3]> {
        let x = grid.point(i);
        let s = crate::cocycle::iterate_log_sv(a, &x, &[n, 2 * n])?;
        let shifted = iterate_product(a, &a.orbit_point(&x, n), n)?.log_svd()?.log_s;
        Ok([s[0].clone(), s[1].clone(), shifted])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let nf = n as f64;

    let mut gaps = Vec::new();
    for &i in tau.positions() {
        let f = SvFormula::RatioRho(i);
        let vals: Vec<f64> = per.iter().map(|p| f.log_value(&p[0]) / nf).collect();
        let dev = deviation_from_values(&vals, &f, n, delta, norms.c_small());
        let gamma = dev.average;
        let mut margin = f64::INFINITY;
        for v in &vals {
            if (v - gamma).abs() <= delta {
                margin = margin.min(v - (gamma - delta));
            }
        }
        let gbar = gamma - delta;
        let bad = vals.iter().filter(|v| **v <= gbar).count() as f64 / vals.len() as f64;
        let avg_margin = gamma - (gbar - cst * bad);
        gaps.push(GapCheck {
            position: i,
            gamma,
            deviation: dev,
            pointwise_margin: margin,
            pointwise_holds: margin > 0.0,
            bad_fraction: bad,
            average_margin: avg_margin,
            average_holds: avg_margin > 0.0,
        });
    }

    let mut angles = Vec::new();
    for j in 1..=tau.len() {
        let f = SvFormula::BlockProduct(tau.clone(), j);
        let v_n: Vec<f64> = per.iter().map(|p| f.log_value(&p[0]) / nf).collect();
        let v_2n: Vec<f64> = per.iter().map(|p| f.log_value(&p[1]) / (2.0 * nf)).collect();
        let v_shift: Vec<f64> = per.iter().map(|p| f.log_value(&p[2]) / nf).collect();
        let (l_n, l_2n) = (mean(&v_n), mean(&v_2n));
        let eta = (l_n - l_2n).abs() * (1.0 + 1e-9) + 1e-15;
        let mut bad = 0usize;
        let mut margin = f64::INFINITY;
        for k in 0..per.len() {
            let in_bad = (v_n[k] - l_n).abs() > delta || (v_shift[k] - l_n).abs() > delta || (v_2n[k] - l_2n).abs() > delta;
            if in_bad {
                bad += 1;
                continue;
            }
            let lhs = 2.0 * v_2n[k] - v_n[k] - v_shift[k];
            margin = margin.min(lhs + 2.0 * eta + 4.0 * delta);
        }
        angles.push(AngleCheck { block: j, eta, bad_fraction: bad as f64 / per.len() as f64, margin, holds: margin > 0.0 });
    }
    Ok(LemmaChecks { n, delta, scaling_constant: cst, gaps, angles })
}
