use cocycle_core::cocycle::{ldt_deviation, log_det_integral, strip_norms, Cocycle, Frequency, QuadratureGrid, TrigPoly};
use cocycle_core::models::{jacobi_cocycle, random_trig_cocycle, JacobiData};
use cocycle_core::random::rng;
use cocycle_core::spectra::{block_and_gap, filtration_distance, holder_probe, lyapunov_estimate, oseledets_filtration_grid};

use super::{config, finish, formula_name, join, parse_formula, signature, Outcome};
use crate::cli::{HolderArgs, JacobiArgs, LdtArgs, LyapunovArgs, OseledetsArgs};
use crate::error::{LabError, LabResult};
use crate::format::{load_cocycle, load_jacobi};
use crate::report::{Report, Value};

fn grid_for(a: &Cocycle, n: usize) -> LabResult<QuadratureGrid> {
    let g = QuadratureGrid::new(n, a.d())?;
    a.validate_on(&g)?;
    Ok(g)
}

fn exponent_columns(first: &str, m: usize, tail: &[&str]) -> Vec<String> {
    let mut c = vec![first.to_string()];
    c.extend((1..=m).map(|j| format!("L{j}")));
    c.extend(tail.iter().map(|s| s.to_string()));
    c
}

/// Columns `n,L1,...,Lm,sumL,det_integral`; one row per scale.
pub fn lyapunov(a: &LyapunovArgs) -> LabResult<Outcome> {
    let mut cfg = config("lyapunov", &a.common);
    cfg.inputs = vec![a.cocycle.clone()];
    cfg.grid = Some(a.grid);
    cfg.scales = a.scales.clone();
    cfg.tolerances = vec![("gamma_min".into(), a.gamma_min)];
    cfg.validate()?;
    let c = load_cocycle(&a.cocycle)?;
    let grid = grid_for(&c, a.grid)?;
    let mut rep = Report::with_columns("lyapunov", exponent_columns("n", c.m(), &["sumL", "det_integral"]));
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    let est = lyapunov_estimate(&c, &a.scales, &grid)?;
    let det = log_det_integral(&c, &grid)?;
    for (k, &n) in est.scales.iter().enumerate() {
        let mut row: Vec<Value> = vec![n.into()];
        row.extend(est.exponents[k].iter().map(|v| Value::Float(*v)));
        row.push(est.blocks[k][c.m() - 1].into());
        row.push(det.into());
        rep.push(row);
    }
    rep.note("subadditive", est.subadditive);
    rep.note("subadditivity_defect", est.subadditivity_defect);
    rep.note("uncertainty", join(&est.uncertainty.iter().map(|u| crate::report::format_float(*u)).collect::<Vec<_>>()));
    if est.scales.len() >= 2 {
        let bg = block_and_gap(&est, a.gamma_min)?;
        rep.note("gap_positions", join(&bg.positions));
        rep.note("blocks", join(&bg.blocks.iter().map(|b| crate::report::format_float(*b)).collect::<Vec<_>>()));
    }
    Ok(Outcome::ok(finish(rep, &cfg, false)))
}

/// Columns `n,average,measure,bound_reference`.
pub fn ldt(a: &LdtArgs) -> LabResult<Outcome> {
    let mut cfg = config("ldt", &a.common);
    cfg.inputs = vec![a.cocycle.clone()];
    cfg.grid = Some(a.grid);
    cfg.scales = a.scales.clone();
    cfg.tolerances = vec![("delta".into(), a.delta)];
    cfg.validate()?;
    if !a.delta.is_finite() || a.delta <= 0.0 {
        return Err(LabError::Usage("delta must be positive".into()));
    }
    let c = load_cocycle(&a.cocycle)?;
    let tau = if a.tau.is_empty() { None } else { Some(signature(&a.tau, c.m())?) };
    let f = parse_formula(&a.formula, tau.as_ref(), c.m())?;
    let grid = grid_for(&c, a.grid)?;
    let mut rep = Report::new("ldt", &["n", "average", "measure", "bound_reference"]);
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    let mut c_small = 0.0;
    for &n in &a.scales {
        let d = ldt_deviation(&c, &f, n, a.delta, &grid)?;
        c_small = d.c;
        rep.push(vec![n.into(), d.average.into(), d.measure.into(), d.bound_reference.into()]);
    }
    rep.note("formula", formula_name(&f));
    rep.note("c", c_small);
    Ok(Outcome::ok(finish(rep, &cfg, false)))
}

/// Columns `radius,difference,status`.
pub fn holder(a: &HolderArgs) -> LabResult<Outcome> {
    let mut cfg = config("holder-probe", &a.common);
    cfg.inputs = vec![a.cocycle.clone(), a.direction.clone()];
    cfg.grid = Some(a.grid);
    cfg.scales = vec![a.n_star];
    cfg.seed = a.seed;
    cfg.tolerances = vec![("gamma_min".into(), a.gamma_min)];
    cfg.validate()?;
    let c = load_cocycle(&a.cocycle)?;
    let tau = signature(&a.tau, c.m())?;
    let f = parse_formula(&a.formula, Some(&tau), c.m())?;
    let dir = if a.direction == "random" {
        random_trig_cocycle(&mut rng(a.seed), c.m(), c.frequency().clone(), c.r(), 2, 1.0)?
    } else {
        load_cocycle(&a.direction)?
    };
    if dir.m() != c.m() || dir.d() != c.d() {
        return Err(LabError::Usage("direction must match the cocycle's size and torus dimension".into()));
    }
    let grid = grid_for(&c, a.grid)?;
    let mut rep = Report::new("holder-probe", &["radius", "difference", "status"]);
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    let p = holder_probe(&c, &tau, &f, &dir, &a.radii, a.n_star, &grid, a.gamma_min)?;
    for (h, d) in p.radii.iter().zip(&p.differences) {
        rep.push(vec![(*h).into(), (*d).into(), "kept".into()]);
    }
    for h in &p.gap_lost {
        rep.push(vec![(*h).into(), f64::NAN.into(), "gap-lost".into()]);
    }
    rep.note("formula", formula_name(&f));
    rep.note("theta", p.theta);
    rep.note("r2", p.r2);
    rep.note("degenerate", p.degenerate);
    rep.note("direction_norm", p.direction_norm);
    Ok(Outcome::ok(finish(rep, &cfg, false)))
}

/// Columns `n0,n1,distance,c_meas,defined_n0,defined_n1` for consecutive
/// scale pairs and, with three or more scales, the first and last.
pub fn oseledets(a: &OseledetsArgs) -> LabResult<Outcome> {
    let mut cfg = config("oseledets", &a.common);
    cfg.inputs = vec![a.cocycle.clone()];
    cfg.grid = Some(a.grid);
    cfg.scales = a.scales.clone();
    cfg.validate()?;
    if a.scales.len() < 2 {
        return Err(LabError::Usage("need at least two scales".into()));
    }
    let c = load_cocycle(&a.cocycle)?;
    let tau = signature(&a.tau, c.m())?;
    let grid = grid_for(&c, a.grid)?;
    let mut rep = Report::new("oseledets", &["n0", "n1", "distance", "c_meas", "defined_n0", "defined_n1"]);
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    let fields = a.scales.iter().map(|&n| oseledets_filtration_grid(&c, &tau, n, &grid)).collect::<Result<Vec<_>, _>>()?;
    let mut pairs: Vec<(usize, usize)> = (1..fields.len()).map(|i| (i - 1, i)).collect();
    if fields.len() > 2 {
        pairs.push((0, fields.len() - 1));
    }
    let mut consecutive = Vec::new();
    for (i, j) in pairs {
        let d = filtration_distance(&fields[i], &fields[j])?;
        if j == i + 1 {
            consecutive.push(d);
        }
        let (n0, n1) = (a.scales[i], a.scales[j]);
        rep.push(vec![
            n0.into(),
            n1.into(),
            d.into(),
            (d * n1 as f64 / n0 as f64).into(),
            fields[i].defined_fraction.into(),
            fields[j].defined_fraction.into(),
        ]);
    }
    rep.note("decreasing", consecutive.windows(2).all(|w| w[1] < w[0]));
    Ok(Outcome::ok(finish(rep, &cfg, false)))
}

fn almost_mathieu_data(lambda: f64, e: f64, freq: &Frequency) -> LabResult<JacobiData> {
    Ok(JacobiData::new(1, vec![TrigPoly::constant(1, 1.0)], vec![TrigPoly::zero()], vec![TrigPoly::cos(&[1], 2.0)], lambda, e, freq)?)
}

/// Columns `lambda,E,L1,...,L2b,sumL` at scale n.
pub fn jacobi_scan(a: &JacobiArgs) -> LabResult<Outcome> {
    let mut cfg = config("jacobi-scan", &a.common);
    cfg.inputs = a.jacobi.iter().cloned().collect();
    cfg.grid = Some(a.grid);
    cfg.scales = vec![a.n];
    cfg.validate()?;
    if a.lambdas.is_empty() || a.energies.is_empty() {
        return Err(LabError::Usage("need at least one lambda and one energy".into()));
    }
    let (base, freq, r) = match &a.jacobi {
        Some(path) => {
            let s = load_jacobi(path)?;
            (s.data, s.freq, s.r)
        }
        None => {
            let f = Frequency::golden();
            (almost_mathieu_data(a.lambdas[0], a.energies[0], &f)?, f, 0.5)
        }
    };
    let m = 2 * base.band();
    let grid = QuadratureGrid::new(a.grid, freq.d())?;
    let mut rep = Report::with_columns("jacobi-scan", {
        let mut c = vec!["lambda".to_string()];
        c.extend(exponent_columns("E", m, &["sumL"]));
        c
    });
    // validate every parameter pair before computing anything
    let mut cocycles = Vec::new();
    for &l in &a.lambdas {
        for &e in &a.energies {
            if !(l > 0.0 && l.is_finite() && e.is_finite()) {
                return Err(LabError::Usage(format!("bad scan point lambda = {l}, E = {e}")));
            }
            let mut d = base.clone();
            d.lambda = l;
            d.energy = e;
            cocycles.push((l, e, jacobi_cocycle(d, freq.clone(), r)?));
        }
    }
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    for (l, e, c) in &cocycles {
        let est = lyapunov_estimate(c, &[a.n], &grid)?;
        let mut row: Vec<Value> = vec![(*l).into(), (*e).into()];
        row.extend(est.exponents[0].iter().map(|v| Value::Float(*v)));
        row.push(est.blocks[0][m - 1].into());
        rep.push(row);
    }
    if let Some((_, _, c)) = cocycles.first() {
        rep.note("scaling_constant", strip_norms(c, &grid)?.c_a);
    }
    Ok(Outcome::ok(finish(rep, &cfg, false)))
}
