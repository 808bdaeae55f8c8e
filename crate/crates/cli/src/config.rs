//! Run configuration: one TOML document per run.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vsoliton::fields::HoloField;
use vsoliton::grid::{GridSpec, RealField};
use vsoliton::solver::{validate_schedule, ProblemFamily, SolveOptions};

use crate::expr::TrigExpr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error at `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid<T>(key: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub grid: Option<GridConfig>,
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub suites: SuitesConfig,
    /// Not echoed into reports: where a report lands does not change it.
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Samples per real axis.
    pub samples: usize,
    #[serde(default = "default_period")]
    pub period: f64,
}

fn default_period() -> f64 {
    std::f64::consts::TAU
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// `F` given directly.
    Datum,
    /// `F` rebuilt per ε so that `solution` is exact.
    Manufactured,
    /// `F` manufactured once at `eps_ref` and held fixed.
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: DataKind,
    #[serde(default = "zero_expr")]
    pub phi: String,
    /// `Z^k` as `[re, im]` pairs.
    pub z: Vec<[f64; 2]>,
    pub f: Option<String>,
    pub solution: Option<String>,
    pub lambda: f64,
    pub eps: Option<f64>,
    pub schedule: Option<Vec<f64>>,
    pub eps_ref: Option<f64>,
    /// Initial guess; defaults to zero.
    pub initial: Option<String>,
    /// Sup norm of a seeded random band-limited start added to `initial`.
    pub initial_random: Option<f64>,
}

fn zero_expr() -> String {
    "0".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_newton_iters: usize,
    pub residual_tol: f64,
    pub damping_factor: f64,
    pub max_halvings: usize,
    pub linear_tol: f64,
    pub max_linear_iters: usize,
    pub positivity_floor: f64,
    /// Compute the estimate ledger of converged solves.
    pub ledger: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        SolverConfig {
            max_newton_iters: o.max_newton_iters,
            residual_tol: o.residual_tol,
            damping_factor: o.damping_factor,
            max_halvings: o.max_halvings,
            linear_tol: o.linear_tol,
            max_linear_iters: o.max_linear_iters,
            positivity_floor: o.positivity_floor,
            ledger: true,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            max_newton_iters: self.max_newton_iters,
            residual_tol: self.residual_tol,
            damping_factor: self.damping_factor,
            max_halvings: self.max_halvings,
            linear_tol: self.linear_tol,
            max_linear_iters: self.max_linear_iters,
            positivity_floor: self.positivity_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Estimates,
    Reduction,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "identities" => Ok(Suite::Identities),
            "estimates" => Ok(Suite::Estimates),
            "reduction" => Ok(Suite::Reduction),
            other => Err(format!(
                "unknown suite `{other}`, expected identities, estimates or reduction"
            )),
        }
    }
}

/// Test hook: breaks one quantity so that its check must fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    CorruptDivergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuitesConfig {
    pub run: Vec<Suite>,
    pub identity_samples: usize,
    pub lemma41_samples: usize,
    pub reduction_samples: usize,
    pub tau: f64,
    pub fault: Option<Fault>,
}

impl Default for SuitesConfig {
    fn default() -> Self {
        SuitesConfig {
            run: Vec::new(),
            identity_samples: 20,
            lemma41_samples: 100,
            reduction_samples: 100,
            tau: 0.5,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.into(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// Checks everything that does not need the command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(g) = &self.grid {
            g.spec()?;
        }
        if let Some(p) = &self.problem {
            let Some(g) = &self.grid else {
                return invalid("grid", "a [problem] needs a [grid] table");
            };
            p.validate(g.n)?;
        }
        if let Err(e) = self.solver.options().validate() {
            return invalid("solver", e.to_string());
        }
        let s = &self.suites;
        if s.identity_samples == 0 {
            return invalid("suites.identity_samples", "must be positive");
        }
        if s.lemma41_samples == 0 {
            return invalid("suites.lemma41_samples", "must be positive");
        }
        if s.reduction_samples == 0 {
            return invalid("suites.reduction_samples", "must be positive");
        }
        if !(s.tau > 0.0 && s.tau.is_finite()) {
            return invalid(
                "suites.tau",
                format!("level must be positive, got {}", s.tau),
            );
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        match &self.grid {
            Some(g) => g.spec(),
            None => invalid("grid", "missing [grid] table"),
        }
    }

    pub fn problem(&self) -> Result<&ProblemConfig, ConfigError> {
        self.problem
            .as_ref()
            .map_or_else(|| invalid("problem", "missing [problem] table"), Ok)
    }

    /// The ε values a command runs: `eps` for solve, `schedule` for sweep.
    pub fn schedule(&self, sweep: bool) -> Result<Vec<f64>, ConfigError> {
        let p = self.problem()?;
        if sweep {
            match &p.schedule {
                Some(s) => Ok(s.clone()),
                None => invalid("problem.schedule", "sweep needs an eps schedule"),
            }
        } else {
            match p.eps {
                Some(e) => Ok(vec![e]),
                None => invalid("problem.eps", "solve needs eps"),
            }
        }
    }

    pub fn family(&self) -> Result<ProblemFamily, ConfigError> {
        let g = self.grid_spec()?;
        self.problem()?.family(g)
    }

    pub fn initial_guess(&self) -> Result<RealField, ConfigError> {
        let g = self.grid_spec()?;
        let p = self.problem()?;
        let mut u = match &p.initial {
            Some(s) => parse_expr("problem.initial", s, g.n())?.sample(g),
            None => RealField::zeros(g),
        };
        if let Some(a) = p.initial_random {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let r = RealField::random_band_limited(g, 2, a, &mut rng);
            u = u.add(&r).expect("same grid");
        }
        Ok(u)
    }
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec, ConfigError> {
        if !(self.n == 1 || self.n == 2) {
            return invalid(
                "grid.n",
                format!("complex dimension must be 1 or 2, got {}", self.n),
            );
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return invalid(
                "grid.period",
                format!("must be positive, got {}", self.period),
            );
        }
        GridSpec::new(self.n, self.samples, self.period)
            .or_else(|e| invalid("grid.samples", e.to_string()))
    }
}

fn parse_expr(key: &str, s: &str, n: usize) -> Result<TrigExpr, ConfigError> {
    let e = TrigExpr::parse(s).or_else(|e| invalid(key, format!("{e} in \"{s}\"")))?;
    match e.dim() {
        Err(m) => invalid(key, m),
        Ok(Some(d)) if d != 2 * n => invalid(
            key,
            format!(
                "frequency vectors need {} entries for n = {n}, got {d}",
                2 * n
            ),
        ),
        Ok(_) => Ok(e),
    }
}

impl ProblemConfig {
    fn validate(&self, n: usize) -> Result<(), ConfigError> {
        if !(self.lambda <= 0.0) || !self.lambda.is_finite() {
            return invalid(
                "problem.lambda",
                format!("lambda must satisfy lambda <= 0, got {}", self.lambda),
            );
        }
        if self.z.len() != n {
            return invalid(
                "problem.z",
                format!("expected {n} coefficient pair(s), got {}", self.z.len()),
            );
        }
        if self.z.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("problem.z", "coefficients must be finite");
        }
        parse_expr("problem.phi", &self.phi, n)?;
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return invalid("problem.eps", format!("eps must be positive, got {e}"));
            }
        }
        if let Some(s) = &self.schedule {
            if let Err(e) = validate_schedule(s) {
                return invalid("problem.schedule", e.to_string());
            }
        }
        if let Some(a) = self.initial_random {
            if !(a >= 0.0 && a.is_finite()) {
                return invalid("problem.initial_random", "must be a non-negative amplitude");
            }
        }
        if let Some(s) = &self.initial {
            parse_expr("problem.initial", s, n)?;
        }
        match self.kind {
            DataKind::Datum => {
                let Some(f) = &self.f else {
                    return invalid("problem.f", "kind = \"datum\" needs f");
                };
                parse_expr("problem.f", f, n)?;
                if self.solution.is_some() {
                    return invalid(
                        "problem.solution",
                        "only manufactured kinds take a solution",
                    );
                }
            }
            DataKind::Manufactured | DataKind::Frozen => {
                let Some(u) = &self.solution else {
                    return invalid("problem.solution", "manufactured kinds need a solution");
                };
                parse_expr("problem.solution", u, n)?;
                if self.f.is_some() {
                    return invalid("problem.f", "manufactured kinds build f from the solution");
                }
            }
        }
        match (self.kind, self.eps_ref) {
            (DataKind::Frozen, Some(e)) if !(e > 0.0 && e.is_finite()) => {
                invalid("problem.eps_ref", format!("must be positive, got {e}"))
            }
            (DataKind::Frozen, None) => {
                invalid("problem.eps_ref", "kind = \"frozen\" needs eps_ref")
            }
            (DataKind::Frozen, _) => Ok(()),
            (_, Some(_)) => invalid("problem.eps_ref", "only kind = \"frozen\" takes eps_ref"),
            (_, None) => Ok(()),
        }
    }

    pub fn holo(&self) -> Result<HoloField, ConfigError> {
        HoloField::new(self.z.iter().map(|&[a, b]| C64::new(a, b)).collect())
            .or_else(|e| invalid("problem.z", e.to_string()))
    }

    fn field(&self, key: &str, s: &str, g: GridSpec) -> Result<RealField, ConfigError> {
        Ok(parse_expr(key, s, g.n())?.sample(g))
    }

    pub fn family(&self, g: GridSpec) -> Result<ProblemFamily, ConfigError> {
        self.validate(g.n())?;
        let phi = self.field("problem.phi", &self.phi, g)?;
        let z = self.holo()?;
        let lambda = self.lambda;
        let family = match self.kind {
            DataKind::Datum => ProblemFamily::Datum {
                phi,
                z,
                f: self.field("problem.f", self.f.as_deref().unwrap_or("0"), g)?,
                lambda,
            },
            DataKind::Manufactured => ProblemFamily::Manufactured {
                solution: self.field(
                    "problem.solution",
                    self.solution.as_deref().unwrap_or("0"),
                    g,
                )?,
                phi,
                z,
                lambda,
            },
            DataKind::Frozen => ProblemFamily::FrozenManufactured {
                solution: self.field(
                    "problem.solution",
                    self.solution.as_deref().unwrap_or("0"),
                    g,
                )?,
                phi,
                z,
                lambda,
                eps_ref: self.eps_ref.unwrap_or(1.0),
            },
        };
        Ok(family)
    }
}
