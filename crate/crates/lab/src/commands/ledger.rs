use cocycle_core::cocycle::{diophantine_check, golden_mean, Frequency};
use cocycle_core::spectra::{inductive_ledger, uniform_gaps_schedule, LedgerState};

use super::{config, finish, join, Outcome};
use crate::cli::{DiophArgs, LedgerArgs};
use crate::error::{LabError, LabResult};
use crate::report::{format_float, Report};

/// One step of the inductive bookkeeping. An invalid step is reported in the
/// output, not through the exit status.
pub fn ledger(a: &LedgerArgs) -> LabResult<Outcome> {
    let delta_bar = a.delta_bar.unwrap_or_else(|| a.n0.powf(-0.75));
    let mut cfg = config("ledger", &a.common);
    cfg.tolerances = vec![
        ("gamma0".into(), a.gamma),
        ("eta0".into(), a.eta),
        ("delta".into(), a.delta),
        ("delta_bar".into(), delta_bar),
        ("C".into(), a.c),
        ("n0".into(), a.n0),
        ("n1".into(), a.n1),
    ];
    cfg.validate()?;
    let mut rep =
        Report::new("ledger", &["gamma0", "eta0", "delta", "delta_bar", "C", "n0", "n1", "gamma1", "eta1", "valid", "violations"]);
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    let s = LedgerState { gamma: a.gamma, eta: a.eta, delta: a.delta, delta_bar, c: a.c, n0: a.n0, n1: a.n1 };
    let o = inductive_ledger(&s);
    rep.push(vec![
        a.gamma.into(),
        a.eta.into(),
        a.delta.into(),
        delta_bar.into(),
        a.c.into(),
        a.n0.into(),
        a.n1.into(),
        o.gamma1.into(),
        o.eta1.into(),
        o.valid.into(),
        join(&o.violations).into(),
    ]);
    if a.schedule_terms > 0 {
        let u = uniform_gaps_schedule(a.n0, a.schedule_terms)?;
        let fmt = |v: &[f64]| join(&v.iter().map(|x| format_float(*x)).collect::<Vec<_>>());
        rep.note("schedule_log_scales", fmt(&u.log_scales));
        rep.note("schedule_deltas", fmt(&u.deltas));
        rep.note("schedule_delta_bars", fmt(&u.delta_bars));
        rep.note("schedule_delta_sum", u.delta_sum);
        rep.note("schedule_delta_bound", u.delta_bound);
        rep.note("schedule_ratio_sum", u.ratio_sum);
        rep.note("schedule_ratio_bound", u.ratio_bound);
    }
    Ok(Outcome::ok(finish(rep, &cfg, false)))
}

fn parse_omega(parts: &[String]) -> LabResult<Frequency> {
    let mut w = Vec::new();
    for p in parts.iter().flat_map(|s| s.split(',')) {
        let p = p.trim();
        w.push(match p {
            "golden" => golden_mean(),
            "sqrt2" => 2f64.sqrt() - 1.0,
            _ => p.parse::<f64>().map_err(|_| LabError::Usage(format!("cannot read frequency component {p:?}")))?,
        });
    }
    Ok(Frequency::new(&w)?)
}

pub fn dioph(a: &DiophArgs) -> LabResult<Outcome> {
    let mut cfg = config("dioph", &a.common);
    cfg.inputs = a.omega.clone();
    cfg.tolerances = vec![("t".into(), a.t)];
    cfg.scales = vec![a.k_max];
    cfg.validate()?;
    let omega = parse_omega(&a.omega)?;
    let mut rep = Report::new("dioph", &["holds", "worst_k", "worst_ratio"]);
    if a.common.dry_run {
        return Ok(Outcome::ok(finish(rep, &cfg, true)));
    }
    let r = diophantine_check(&omega, a.t, a.k_max)?;
    rep.push(vec![r.holds.into(), join(&r.worst_k).into(), r.worst_ratio.into()]);
    Ok(Outcome::ok(finish(rep, &cfg, false)))
}
