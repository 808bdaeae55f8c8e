//! Report artifacts.
//!
//! `report.json` has the top-level keys `config_echo`, `iterates`, `ledger`,
//! `suites` and `version`. Every float is written with 17 significant digits
//! (`d.dddddddddddddddde±x`), which round-trips any `f64` exactly; non-finite
//! values become `null`. CSV files use the same float format and the column
//! orders in [`ITERATE_COLUMNS`], [`LEDGER_COLUMNS`] and [`CHECK_COLUMNS`].

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use vsoliton::estimates::EstimateLedger;
use vsoliton::solver::SolveReport;

use crate::config::RunConfig;

pub const SCHEMA: &str = "vsoliton-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Version {
    pub schema: &'static str,
    pub package: &'static str,
}

impl Default for Version {
    fn default() -> Self {
        Version {
            schema: SCHEMA,
            package: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterateRow {
    pub eps: f64,
    pub iteration: usize,
    pub residual: f64,
    pub step: f64,
    pub linear_iterations: usize,
    pub min_eig_metric: f64,
    pub min_eig_linearization: f64,
}

pub const ITERATE_COLUMNS: [&str; 7] = [
    "eps",
    "iteration",
    "residual",
    "step",
    "linear_iterations",
    "min_eig_metric",
    "min_eig_linearization",
];

impl IterateRow {
    pub fn from_report(rep: &SolveReport) -> Vec<IterateRow> {
        let eps = rep.problem.eps();
        rep.iterates
            .iter()
            .map(|it| IterateRow {
                eps,
                iteration: it.iteration,
                residual: it.residual,
                step: it.step,
                linear_iterations: it.linear_iterations,
                min_eig_metric: it.min_eig_metric,
                min_eig_linearization: it.min_eig_linearization,
            })
            .collect()
    }

    fn record(&self) -> Vec<String> {
        vec![
            float(self.eps),
            self.iteration.to_string(),
            float(self.residual),
            float(self.step),
            self.linear_iterations.to_string(),
            float(self.min_eig_metric),
            float(self.min_eig_linearization),
        ]
    }
}

/// Summary of one solve at one ε.
#[derive(Debug, Clone, Serialize)]
pub struct RunLedger {
    pub eps: f64,
    pub converged: bool,
    pub newton_steps: usize,
    pub final_residual: f64,
    pub c_eps: f64,
    pub normalization_defect: f64,
    pub normalization_shift: f64,
    pub sup_abs_u: f64,
    pub estimates: Option<EstimateLedger>,
}

pub const LEDGER_COLUMNS: [&str; 20] = [
    "eps",
    "converged",
    "newton_steps",
    "final_residual",
    "c_eps",
    "sup_abs_u",
    "sup_u",
    "inf_u",
    "sup_lap_u",
    "sup_znorm_tilde",
    "fitted_c",
    "hypothesis_min",
    "minpoint_gap",
    "maxpoint_witness",
    "zhu_sup",
    "zhu_imag",
    "cherrier_constant",
    "moser_q",
    "moser_lhs",
    "moser_constant",
];

impl RunLedger {
    pub fn new(rep: &SolveReport, estimates: Option<EstimateLedger>) -> RunLedger {
        RunLedger {
            eps: rep.problem.eps(),
            converged: rep.converged,
            newton_steps: rep.newton_steps(),
            final_residual: rep.final_residual(),
            c_eps: rep.problem.c_eps(),
            normalization_defect: rep.problem.normalization_defect(),
            normalization_shift: rep.normalization_shift,
            sup_abs_u: rep.u.max_abs(),
            estimates,
        }
    }

    fn record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(float).unwrap_or_default();
        let e = self.estimates.as_ref();
        let moser = e.and_then(|e| e.moser);
        vec![
            float(self.eps),
            self.converged.to_string(),
            self.newton_steps.to_string(),
            float(self.final_residual),
            float(self.c_eps),
            float(self.sup_abs_u),
            opt(e.map(|e| e.sup_u)),
            opt(e.map(|e| e.inf_u)),
            opt(e.map(|e| e.sup_lap_u)),
            opt(e.map(|e| e.sup_znorm_tilde)),
            opt(e.map(|e| e.fitted_c)),
            opt(e.map(|e| e.hypothesis_min)),
            opt(e.and_then(|e| e.minpoint_gap)),
            opt(e.and_then(|e| e.maxpoint_witness)),
            opt(e.and_then(|e| e.zhu_sup)),
            opt(e.and_then(|e| e.zhu_imag)),
            opt(e.and_then(|e| e.cherrier_constant)),
            opt(moser.map(|m| m.q)),
            opt(moser.map(|m| m.lhs)),
            opt(moser.map(|m| m.constant)),
        ]
    }
}

/// Max/min ratio of each sweep statistic across ε.
#[derive(Debug, Clone, Serialize)]
pub struct Uniformity {
    pub sup_abs_u: f64,
    pub fitted_c: f64,
    pub sup_znorm_tilde: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LedgerSection {
    pub runs: Vec<RunLedger>,
    pub uniformity: Option<Uniformity>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Passes when `value <= bound`.
    AtMost,
    /// Passes when `value >= bound`.
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub samples: usize,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        samples: usize,
        value: f64,
        relation: Relation,
        bound: f64,
    ) -> Check {
        let passed = match relation {
            Relation::AtMost => value <= bound,
            Relation::AtLeast => value >= bound,
        };
        Check {
            name: name.into(),
            samples,
            value,
            relation,
            bound,
            passed,
        }
    }

    pub fn at_most(name: impl Into<String>, samples: usize, value: f64, bound: f64) -> Check {
        Check::new(name, samples, value, Relation::AtMost, bound)
    }

    pub fn at_least(name: impl Into<String>, samples: usize, value: f64, bound: f64) -> Check {
        Check::new(name, samples, value, Relation::AtLeast, bound)
    }

    /// A check whose computation itself failed.
    pub fn errored(
        name: impl Into<String>,
        samples: usize,
        relation: Relation,
        bound: f64,
    ) -> Check {
        Check {
            name: name.into(),
            samples,
            value: f64::NAN,
            relation,
            bound,
            passed: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub errors: Vec<String>,
}

impl SuiteReport {
    pub fn new(name: &str, checks: Vec<Check>, errors: Vec<String>) -> SuiteReport {
        SuiteReport {
            name: name.into(),
            passed: errors.is_empty() && checks.iter().all(|c| c.passed),
            checks,
            errors,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const CHECK_COLUMNS: [&str; 7] = [
    "suite", "check", "samples", "value", "relation", "bound", "passed",
];

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub config_echo: &'a RunConfig,
    pub iterates: Vec<IterateRow>,
    pub ledger: Option<LedgerSection>,
    pub suites: Vec<SuiteReport>,
    pub version: Version,
}

/// 17 significant digits.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON with every float at 17 significant digits.
struct FloatFormatter(PrettyFormatter<'static>);

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, FloatFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    fs::write(path, to_json(value)?)
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()
}

pub fn write_iterates(path: &Path, rows: &[IterateRow]) -> io::Result<()> {
    write_csv(path, &ITERATE_COLUMNS, rows.iter().map(IterateRow::record))
}

pub fn write_ledger(path: &Path, runs: &[RunLedger]) -> io::Result<()> {
    write_csv(path, &LEDGER_COLUMNS, runs.iter().map(RunLedger::record))
}

pub fn write_checks(path: &Path, suites: &[SuiteReport]) -> io::Result<()> {
    let rows = suites.iter().flat_map(|s| {
        s.checks.iter().map(|c| {
            vec![
                s.name.clone(),
                c.name.clone(),
                c.samples.to_string(),
                float(c.value),
                match c.relation {
                    Relation::AtMost => "at_most".into(),
                    Relation::AtLeast => "at_least".into(),
                },
                float(c.bound),
                c.passed.to_string(),
            ]
        })
    });
    write_csv(path, &CHECK_COLUMNS, rows)
}
