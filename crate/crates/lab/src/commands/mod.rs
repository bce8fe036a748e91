//! Subcommand bodies. Each returns a report and the number of violated
//! inequalities it found.

pub mod chains;
pub mod ledger;
pub mod spectral;

use cocycle_core::linalg::{Signature, SvFormula};

use crate::cli::Common;
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::Report;

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub violations: usize,
}

impl Outcome {
    pub fn ok(report: Report) -> Self {
        Outcome { report, violations: 0 }
    }
}

pub(crate) fn config(command: &str, common: &Common) -> ExperimentConfig {
    ExperimentConfig::new(command, common.format.into(), common.output.clone())
}

/// Attach the configuration; for dry runs also mark the (empty) report.
pub(crate) fn finish(mut report: Report, cfg: &ExperimentConfig, dry: bool) -> Report {
    report.config = cfg.entries();
    if dry {
        report.rows.clear();
        report.summary = vec![("dry_run".into(), true.into())];
    }
    report
}

pub(crate) fn signature(tau: &[usize], m: usize) -> LabResult<Signature> {
    Ok(Signature::new(tau, m)?)
}

/// `s3`, `p2`, `rho1`, `sigma1`, or `pi2` (needs a signature).
pub(crate) fn parse_formula(text: &str, tau: Option<&Signature>, m: usize) -> LabResult<SvFormula> {
    let t = text.trim();
    let split = t.find(|c: char| c.is_ascii_digit()).ok_or_else(|| LabError::Usage(format!("formula {t:?} has no index")))?;
    let (name, idx) = t.split_at(split);
    let j: usize = idx.parse().map_err(|_| LabError::Usage(format!("bad formula index in {t:?}")))?;
    let f = match name {
        "s" => SvFormula::SingularValue(j),
        "p" => SvFormula::TopProduct(j),
        "rho" => SvFormula::RatioRho(j),
        "sigma" => SvFormula::RatioSigma(j),
        "pi" => {
            let tau = tau.ok_or_else(|| LabError::Usage("block formulas need --tau".into()))?;
            SvFormula::BlockProduct(tau.clone(), j)
        }
        _ => return Err(LabError::Usage(format!("unknown formula {t:?}; use s, p, rho, sigma or pi"))),
    };
    f.validate(m)?;
    Ok(f)
}

pub(crate) fn formula_name(f: &SvFormula) -> String {
    match f {
        SvFormula::SingularValue(j) => format!("s{j}"),
        SvFormula::TopProduct(j) => format!("p{j}"),
        SvFormula::RatioRho(j) => format!("rho{j}"),
        SvFormula::RatioSigma(j) => format!("sigma{j}"),
        SvFormula::BlockProduct(_, j) => format!("pi{j}"),
    }
}

pub(crate) fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}
