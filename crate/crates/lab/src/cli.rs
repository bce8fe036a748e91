//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, Outcome};
use crate::error::LabError;
use crate::report::{emit_report, Format};

/// Numerical experiments on quasiperiodic linear cocycles.
#[derive(Parser, Debug)]
#[command(name = "cocycle-lab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<String>,
    /// Validate inputs and emit an empty report without computing.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Finite-scale Lyapunov exponents on a grid.
    Lyapunov(LyapunovArgs),
    /// Avalanche estimates on generated or supplied chains.
    ApCheck(ApCheckArgs),
    /// Fuzz the norm and block sandwiches on random admissible chains.
    SvpFuzz(SvpFuzzArgs),
    /// Large-deviation measure across scales.
    Ldt(LdtArgs),
    /// Hölder exponent fit for a block under small perturbations.
    HolderProbe(HolderArgs),
    /// Distances between Oseledets filtration approximations.
    Oseledets(OseledetsArgs),
    /// One inductive step of the gap ledger.
    Ledger(LedgerArgs),
    /// Lyapunov spectra of a Jacobi cocycle over a (lambda, E) grid.
    JacobiScan(JacobiArgs),
    /// Diophantine condition check for a frequency.
    Dioph(DiophArgs),
}

#[derive(Args, Debug)]
pub struct LyapunovArgs {
    /// Gallery name or cocycle JSON file.
    #[arg(long)]
    pub cocycle: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 4, 8, 16, 32, 64])]
    pub scales: Vec<usize>,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Gap threshold for block detection.
    #[arg(long, default_value_t = 0.1)]
    pub gamma_min: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ApCheckArgs {
    /// Chain JSON file {"tau": [..], "matrices": [[row-major entries], ..]}; generated chains otherwise.
    #[arg(long)]
    pub chain: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1])]
    pub tau: Vec<usize>,
    /// Chain length.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-3, 1e-4, 1e-5])]
    pub kappa: Vec<f64>,
    /// Rotation angle between consecutive links, in degrees.
    #[arg(long, default_value_t = 60.0)]
    pub angle: f64,
    /// Chains per kappa value.
    #[arg(long, default_value_t = 20)]
    pub chains: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SvpFuzzArgs {
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1])]
    pub tau: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub chains: usize,
    /// Lengths are drawn uniformly from 2..=max-length.
    #[arg(long, default_value_t = 20)]
    pub max_length: usize,
    #[arg(long, default_value_t = 60.0)]
    pub angle: f64,
    /// Relative slack on the log-scale inequalities.
    #[arg(long, default_value_t = 1e-9)]
    pub slack: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct LdtArgs {
    #[arg(long)]
    pub cocycle: String,
    /// s3, p1, rho1, sigma2, or pi2 (with --tau).
    #[arg(long, default_value = "p1")]
    pub formula: String,
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![50, 100, 200, 400])]
    pub scales: Vec<usize>,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct HolderArgs {
    #[arg(long)]
    pub cocycle: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1])]
    pub tau: Vec<usize>,
    #[arg(long, default_value = "p1")]
    pub formula: String,
    /// Gallery name, cocycle file, or "random".
    #[arg(long, default_value = "random")]
    pub direction: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6])]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub n_star: usize,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.05)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct OseledetsArgs {
    #[arg(long)]
    pub cocycle: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1])]
    pub tau: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![8, 32, 1024])]
    pub scales: Vec<usize>,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct LedgerArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub delta: f64,
    /// Defaults to n0^(-3/4), the smallest admissible value.
    #[arg(long)]
    pub delta_bar: Option<f64>,
    #[arg(long = "C")]
    pub c: f64,
    #[arg(long)]
    pub n0: f64,
    #[arg(long)]
    pub n1: f64,
    /// Also evaluate the squaring schedule n_{k+1} = n_k^2 over this many terms.
    #[arg(long, default_value_t = 0)]
    pub schedule_terms: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct JacobiArgs {
    /// Jacobi JSON file; the almost Mathieu operator otherwise.
    #[arg(long)]
    pub jacobi: Option<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![3.0])]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0])]
    pub energies: Vec<f64>,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct DiophArgs {
    /// Frequency components, or "golden".
    #[arg(long, value_delimiter = ',', default_values_t = vec!["golden".to_string()])]
    pub omega: Vec<String>,
    #[arg(long, default_value_t = 0.2)]
    pub t: f64,
    #[arg(long, default_value_t = 10_000)]
    pub k_max: usize,
    #[command(flatten)]
    pub common: Common,
}

fn configure_threads() -> Result<(), LabError> {
    if let Ok(v) = std::env::var("COCYCLE_LAB_THREADS") {
        let n: usize =
            v.trim().parse().map_err(|_| LabError::Usage(format!("COCYCLE_LAB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(LabError::Usage("COCYCLE_LAB_THREADS must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lyapunov(_) => "lyapunov",
            Command::ApCheck(_) => "ap-check",
            Command::SvpFuzz(_) => "svp-fuzz",
            Command::Ldt(_) => "ldt",
            Command::HolderProbe(_) => "holder-probe",
            Command::Oseledets(_) => "oseledets",
            Command::Ledger(_) => "ledger",
            Command::JacobiScan(_) => "jacobi-scan",
            Command::Dioph(_) => "dioph",
        }
    }
}

fn execute(cmd: &Command) -> Result<(Outcome, Common), LabError> {
    Ok(match cmd {
        Command::Lyapunov(a) => (commands::spectral::lyapunov(a)?, a.common.clone()),
        Command::ApCheck(a) => (commands::chains::ap_check(a)?, a.common.clone()),
        Command::SvpFuzz(a) => (commands::chains::svp_fuzz(a)?, a.common.clone()),
        Command::Ldt(a) => (commands::spectral::ldt(a)?, a.common.clone()),
        Command::HolderProbe(a) => (commands::spectral::holder(a)?, a.common.clone()),
        Command::Oseledets(a) => (commands::spectral::oseledets(a)?, a.common.clone()),
        Command::Ledger(a) => (commands::ledger::ledger(a)?, a.common.clone()),
        Command::JacobiScan(a) => (commands::spectral::jacobi_scan(a)?, a.common.clone()),
        Command::Dioph(a) => (commands::ledger::dioph(a)?, a.common.clone()),
    })
}

/// Run the tool; returns the process exit code (0 ok, 2 a checked
/// inequality failed, 1 usage or IO error).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let res = configure_threads().and_then(|_| execute(&cli.command)).and_then(|(out, common)| {
        let bytes = emit_report(&out.report, common.format.into())?;
        match &common.output {
            Some(path) => std::fs::write(path, &bytes)?,
            None => std::io::stdout().lock().write_all(&bytes)?,
        }
        Ok(out.violations)
    });
    match res {
        Ok(0) => 0,
        Ok(v) => {
            eprintln!("cocycle-lab {}: {v} violation(s)", cli.command.name());
            2
        }
        Err(e) => {
            eprintln!("cocycle-lab {}: {e}", cli.command.name());
            1
        }
    }
}
