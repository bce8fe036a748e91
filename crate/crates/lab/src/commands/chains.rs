use cocycle_core::avalanche::{admissible_chain, ap_report, norm_sandwich, svp_sandwich, Chain};
use cocycle_core::linalg::{Matrix, Signature};
use cocycle_core::random::rng;
use rand::Rng;
use serde_json::Value as Json;

use super::{config, finish, signature, Outcome};
use crate::cli::{ApCheckArgs, SvpFuzzArgs};
use crate::error::{LabError, LabResult};
use crate::report::{Report, Value};

/// Slack on the log of the σ_τ bound before a row counts as a violation.
const SIGMA_SLACK: f64 = 1e-9;

fn chain_from_json(text: &str) -> LabResult<(Signature, Vec<Matrix>)> {
    let v: Json = serde_json::from_str(text)?;
    let bad = |what: &str| LabError::Format(format!("chain file: {what}"));
    let tau: Vec<usize> = v["tau"]
        .as_array()
        .ok_or_else(|| bad("missing \"tau\""))?
        .iter()
        .map(|t| t.as_u64().map(|t| t as usize).ok_or_else(|| bad("tau entries must be positive integers")))
        .collect::<LabResult<_>>()?;
    let mut mats = Vec::new();
    for g in v["matrices"].as_array().ok_or_else(|| bad("missing \"matrices\""))? {
        let rows = g.as_array().ok_or_else(|| bad("each matrix is a list of rows"))?;
        let m = rows.len();
        let mut data = Vec::with_capacity(m * m);
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == m).ok_or_else(|| bad("matrices must be square"))?;
            for x in row {
                data.push(x.as_f64().ok_or_else(|| bad("entries must be numbers"))?);
            }
        }
        mats.push(Matrix::from_vec(m, m, data));
    }
    let m = mats.first().map(|g| g.rows()).ok_or_else(|| bad("empty chain"))?;
    if mats.iter().any(|g| g.rows() != m) {
        return Err(bad("matrices differ in size"));
    }
    Ok((signature(&tau, m)?, mats))
}

const AP_COLUMNS: [&str; 14] = [
    "kappa_target",
    "chain",
    "n",
    "kappa",
    "epsilon",
    "alpha_min",
    "admissible",
    "d_plus",
    "d_minus",
    "log_sigma_n",
    "log_sigma_bound",
    "ratio_plus",
    "ratio_minus",
    "ratio_delta",
];

pub fn ap_check(a: &ApCheckArgs) -> LabResult<Outcome> {
    let mut cfg = config("ap-check", &a.common);
    cfg.seed = a.seed;
    cfg.scales = vec![a.n];
    cfg.tolerances = a.kappa.iter().map(|k| ("kappa".to_string(), *k)).collect();
    cfg.tolerances.push(("angle_degrees".into(), a.angle));
    let mut jobs: Vec<(f64, usize, Chain)> = Vec::new();
    match &a.chain {
        Some(path) => {
            cfg.inputs = vec![path.clone()];
            cfg.validate()?;
            let (tau, mats) = chain_from_json(&std::fs::read_to_string(path)?)?;
            jobs.push((f64::NAN, 0, Chain::new(mats, tau)?));
        }
        None => {
            cfg.validate()?;
            if a.n < 2 {
                return Err(LabError::Usage("chains need n >= 2".into()));
            }
            if a.kappa.iter().any(|k| !(*k > 0.0 && *k < 1.0)) {
                return Err(LabError::Usage("kappa values must lie in (0, 1)".into()));
            }
            let tau = signature(&a.tau, a.m)?;
            let angle = a.angle.to_radians();
            for &k in &a.kappa {
                for i in 0..a.chains {
                    let mut r = rng(a.seed);
                    r.set_stream(i as u64);
                    let mats = admissible_chain(&mut r, &tau, a.n, k, angle);
                    jobs.push((k, i, Chain::new(mats, tau.clone())?));
                }
            }
        }
    }
    let mut rep = Report::new("ap-check", &AP_COLUMNS);
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    let mut violations = 0;
    let mut admissible = 0usize;
    let (mut worst_plus, mut worst_minus, mut worst_delta) = (0.0f64, 0.0f64, 0.0f64);
    for (k, i, chain) in &jobs {
        let r = ap_report(chain)?;
        let h = &r.hypotheses;
        if h.admissible {
            admissible += 1;
            worst_plus = worst_plus.max(r.ratio_plus);
            worst_minus = worst_minus.max(r.ratio_minus);
            worst_delta = worst_delta.max(r.ratio_delta);
            if r.log_sigma_n > r.log_sigma_bound + SIGMA_SLACK {
                violations += 1;
            }
        }
        rep.push(vec![
            (*k).into(),
            (*i).into(),
            r.n.into(),
            h.kappa.into(),
            h.epsilon.into(),
            h.alpha_min.into(),
            h.admissible.into(),
            r.d_plus.into(),
            r.d_minus.into(),
            r.log_sigma_n.into(),
            r.log_sigma_bound.into(),
            r.ratio_plus.into(),
            r.ratio_minus.into(),
            r.ratio_delta.into(),
        ]);
    }
    rep.note("admissible_chains", admissible);
    rep.note("max_ratio_plus", worst_plus);
    rep.note("max_ratio_minus", worst_minus);
    rep.note("max_ratio_delta", worst_delta);
    rep.note("sigma_violations", violations);
    Ok(Outcome { report: finish(rep, &cfg, false), violations })
}

pub fn svp_fuzz(a: &SvpFuzzArgs) -> LabResult<Outcome> {
    let mut cfg = config("svp-fuzz", &a.common);
    cfg.seed = a.seed;
    cfg.tolerances = vec![("slack".into(), a.slack), ("angle_degrees".into(), a.angle)];
    cfg.scales = vec![a.max_length];
    cfg.validate()?;
    if a.max_length < 2 {
        return Err(LabError::Usage("max-length must be at least 2".into()));
    }
    let tau = signature(&a.tau, a.m)?;
    let mut rep = Report::new("svp-fuzz", &["chain", "n", "kappa", "kind", "log_lower", "log_actual", "log_upper", "holds"]);
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    let angle = a.angle.to_radians();
    let mut violations = 0;
    let mut checked = 0usize;
    for i in 0..a.chains {
        let mut r = rng(a.seed);
        r.set_stream(i as u64);
        let kappa = 10f64.powf(r.random_range(-5.0..-3.0));
        let n = r.random_range(2..=a.max_length);
        let chain = Chain::new(admissible_chain(&mut r, &tau, n, kappa, angle), tau.clone())?;
        let mut sandwiches = Vec::new();
        for j in 1..=tau.len() {
            sandwiches.push((format!("pi{j}"), svp_sandwich(&chain, j)?));
        }
        if tau.positions().contains(&1) {
            sandwiches.push(("norm".to_string(), norm_sandwich(&chain)?));
        }
        for (kind, s) in sandwiches {
            let ok = s.holds(a.slack);
            checked += 1;
            if !ok {
                violations += 1;
            }
            rep.push(vec![
                i.into(),
                n.into(),
                kappa.into(),
                kind.into(),
                s.log_lower.into(),
                s.log_actual.into(),
                s.log_upper.into(),
                Value::Bool(ok),
            ]);
        }
    }
    rep.note("checked", checked);
    rep.note("violations", violations);
    Ok(Outcome { report: finish(rep, &cfg, false), violations })
}
