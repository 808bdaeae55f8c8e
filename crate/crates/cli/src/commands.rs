//! `solve`, `sweep` and `verify`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use vsoliton::estimates::{full_ledger, variation};
use vsoliton::solver::{continuation_solve, newton_solve, SolveReport};
use vsoliton::Error;

use crate::config::{ConfigError, RunConfig, Suite};
use crate::report::{
    self, IterateRow, LedgerSection, Report, RunLedger, SuiteReport, Uniformity, Version,
};
use crate::suites::run_suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Verify,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub suites: Option<Vec<Suite>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

/// Result of a command that ran to the end and wrote its artifacts.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub success: bool,
    /// Failing stage or checks, empty on success.
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.success {
            0
        } else {
            1
        }
    }
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &overrides.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(s) = &overrides.suites {
        cfg.suites.run = s.clone();
    }
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Solve => cmd_solve(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

/// Errors in building the first problem are errors in the data.
fn data_error(e: impl std::fmt::Display) -> CliError {
    ConfigError::Invalid {
        key: "problem".into(),
        message: e.to_string(),
    }
    .into()
}

fn is_data_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidProblem(_)
            | Error::NonPositiveMetric { .. }
            | Error::Domain(_)
            | Error::GridMismatch { .. }
    )
}

fn ledger_of(cfg: &RunConfig, rep: &SolveReport, failures: &mut Vec<String>) -> RunLedger {
    let estimates = if cfg.solver.ledger && rep.converged {
        match full_ledger(rep) {
            Ok(l) => Some(l),
            Err(e) => {
                failures.push(format!("estimates at eps = {}: {e}", rep.problem.eps()));
                None
            }
        }
    } else {
        None
    };
    RunLedger::new(rep, estimates)
}

fn run_suites(cfg: &RunConfig, failures: &mut Vec<String>) -> Vec<SuiteReport> {
    let mut names = cfg.suites.run.clone();
    names.sort();
    names.dedup();
    let reports: Vec<SuiteReport> = names
        .into_iter()
        .map(|s| run_suite(s, &cfg.suites, cfg.seed))
        .collect();
    for s in &reports {
        for c in s.failed_checks() {
            failures.push(format!(
                "{}: {} = {} (bound {})",
                s.name, c.name, c.value, c.bound
            ));
        }
        for e in &s.errors {
            failures.push(format!("{}: {e}", s.name));
        }
    }
    reports
}

fn write_all(
    cfg: &RunConfig,
    iterates: Vec<IterateRow>,
    ledger: Option<LedgerSection>,
    suites: Vec<SuiteReport>,
) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output.dir;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = Vec::new();
    let csv = dir.join("iterates.csv");
    if ledger.is_some() {
        report::write_iterates(&csv, &iterates).map_err(io(&csv))?;
        files.push(csv);
        let csv = dir.join("ledger.csv");
        report::write_ledger(&csv, &ledger.as_ref().expect("checked").runs).map_err(io(&csv))?;
        files.push(csv);
    }
    if !suites.is_empty() {
        let csv = dir.join("checks.csv");
        report::write_checks(&csv, &suites).map_err(io(&csv))?;
        files.push(csv);
    }
    let json = dir.join("report.json");
    let rep = Report {
        config_echo: cfg,
        iterates,
        ledger,
        suites,
        version: Version::default(),
    };
    report::write_json(&json, &rep).map_err(io(&json))?;
    files.insert(0, json);
    Ok(files)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let eps = cfg.schedule(false)?[0];
    let problem = cfg.family()?.at(eps).map_err(data_error)?;
    let mut u0 = cfg.initial_guess()?;
    if problem.mean_zero_gauge() {
        u0 = u0.mean_free();
    }
    let mut failures = Vec::new();
    let mut ledger = LedgerSection::default();
    let mut iterates = Vec::new();
    match newton_solve(Arc::new(problem), &u0, &cfg.solver.options()) {
        Ok(rep) => {
            if !rep.converged {
                failures.push(format!(
                    "newton: not converged after {} steps, residual {:e}",
                    rep.newton_steps(),
                    rep.final_residual()
                ));
            }
            iterates = IterateRow::from_report(&rep);
            ledger.runs.push(ledger_of(cfg, &rep, &mut failures));
        }
        Err(e) if is_data_error(&e) => return Err(data_error(e)),
        Err(e) => failures.push(format!("newton: {e}")),
    }
    ledger.failure = failures.first().cloned();
    let suites = run_suites(cfg, &mut failures);
    let files = write_all(cfg, iterates, Some(ledger), suites)?;
    Ok(Outcome {
        success: failures.is_empty(),
        failures,
        files,
    })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let schedule = cfg.schedule(true)?;
    let family = cfg.family()?;
    let u0 = cfg.initial_guess()?;
    let outcome =
        continuation_solve(&family, &schedule, &u0, &cfg.solver.options()).map_err(data_error)?;
    let mut failures = Vec::new();
    if let Some(e) = outcome.failure {
        if outcome.reports.is_empty() {
            if let Error::Continuation { source, .. } = &e {
                if is_data_error(source) {
                    return Err(data_error(source));
                }
            }
        }
        failures.push(format!("continuation: {e}"));
    }
    let mut ledger = LedgerSection::default();
    let mut iterates = Vec::new();
    for rep in &outcome.reports {
        iterates.extend(IterateRow::from_report(rep));
        ledger.runs.push(ledger_of(cfg, rep, &mut failures));
    }
    let est: Vec<_> = ledger
        .runs
        .iter()
        .filter_map(|r| r.estimates.as_ref())
        .collect();
    if failures.is_empty() && est.len() == schedule.len() {
        let stat = |f: &dyn Fn(&vsoliton::estimates::EstimateLedger) -> f64| {
            variation(&est.iter().map(|e| f(e)).collect::<Vec<_>>())
        };
        ledger.uniformity = Some(Uniformity {
            sup_abs_u: stat(&|e| e.sup_u.abs().max(e.inf_u.abs())),
            fitted_c: stat(&|e| e.fitted_c),
            sup_znorm_tilde: stat(&|e| e.sup_znorm_tilde),
        });
    }
    ledger.failure = failures.first().cloned();
    let suites = run_suites(cfg, &mut failures);
    let files = write_all(cfg, iterates, Some(ledger), suites)?;
    Ok(Outcome {
        success: failures.is_empty(),
        failures,
        files,
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.suites.run.is_empty() {
        return Err(ConfigError::Invalid {
            key: "suites.run".into(),
            message: "verify needs at least one suite (identities, estimates, reduction)".into(),
        }
        .into());
    }
    let mut failures = Vec::new();
    let suites = run_suites(cfg, &mut failures);
    let files = write_all(cfg, Vec::new(), None, suites)?;
    Ok(Outcome {
        success: failures.is_empty(),
        failures,
        files,
    })
}
