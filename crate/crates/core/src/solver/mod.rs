//! Damped Newton solver for the log form of the perturbed equation
//!
//! `log(det g̃ / det g) − log(|Z|²_g̃ + ε) − (F + c_ε − λu) = 0`, `g̃ = g + ∂∂̄u`,
//!
//! with exact linearization `L = g̃_H^{ij̄}∂_i∂_j̄ + λ` where
//! `g̃_H^{ij̄} = g̃^{ij̄} − Z^i Z̄^j / (|Z|²_g̃ + ε)`, and ε-continuation.

mod kernel;
mod krylov;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::HoloField;
use crate::geometry::{self, MetricField, DEFAULT_POSITIVITY_FLOOR};
use crate::grid::{self, GridSpec, HermitianField, RealField};
use crate::linalg::Herm;
use crate::par;

pub use crate::estimates::EstimateLedger;

/// How the datum `F` and the constant `c_ε` were produced.
#[derive(Debug, Clone)]
pub enum ProblemOrigin {
    /// `F` given; `c_ε` from the normalization integral.
    Datum,
    /// `F` built so that `u*` is an exact grid solution; `c_ε` is the
    /// `ωⁿ`-mean of the raw datum.
    Manufactured { solution: Arc<RealField> },
}

/// One instance of the perturbed equation.
#[derive(Debug, Clone)]
pub struct SolitonProblem {
    grid: GridSpec,
    phi: Arc<RealField>,
    z: HoloField,
    f: Arc<RealField>,
    lambda: f64,
    eps: f64,
    c_eps: f64,
    logdet_g: Arc<RealField>,
    normalization_defect: f64,
    origin: ProblemOrigin,
}

/// `c_ε = −log(∫(ε + |Z|²_g) e^F ωⁿ / ∫ωⁿ)`.
pub fn normalization_constant(
    g: &MetricField,
    z: &HoloField,
    f: &RealField,
    eps: f64,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let zn = crate::fields::z_norm_sq(g, z)?;
    let integrand = zn.zip_map(f, |a, b| (eps + a) * b.exp())?;
    let top = grid::integrate(&integrand, g.det())?;
    let vol = grid::integrate(&RealField::constant(*g.grid(), 1.0), g.det())?;
    Ok(-(top / vol).ln())
}

/// `∫((ε + |Z|²_g) e^{F + c_ε} − 1) ωⁿ / ∫ωⁿ`.
pub fn normalization_residual(
    g: &MetricField,
    z: &HoloField,
    f: &RealField,
    eps: f64,
    c_eps: f64,
) -> Result<f64> {
    let zn = crate::fields::z_norm_sq(g, z)?;
    let integrand = zn.zip_map(f, |a, b| (eps + a) * (b + c_eps).exp() - 1.0)?;
    let vol = grid::integrate(&RealField::constant(*g.grid(), 1.0), g.det())?;
    Ok(grid::integrate(&integrand, g.det())? / vol)
}

fn validate(lambda: f64, eps: f64) -> Result<()> {
    if !(lambda <= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidProblem(format!(
            "lambda must satisfy lambda <= 0, got {lambda}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidProblem(format!(
            "eps must be positive, got {eps}"
        )));
    }
    Ok(())
}

impl SolitonProblem {
    /// Problem with a given datum; `c_ε` from the normalization condition.
    pub fn new(phi: RealField, z: HoloField, f: RealField, lambda: f64, eps: f64) -> Result<Self> {
        validate(lambda, eps)?;
        grid::same_grid(phi.grid(), f.grid())?;
        let g = geometry::assemble_metric(&phi)?;
        let logdet_g = Arc::new(g.det().map(f64::ln));
        Self::datum(Arc::new(phi), &g, logdet_g, z, Arc::new(f), lambda, eps)
    }

    /// Datum problem over an already assembled background; large fields are
    /// shared, not copied.
    fn datum(
        phi: Arc<RealField>,
        g: &MetricField,
        logdet_g: Arc<RealField>,
        z: HoloField,
        f: Arc<RealField>,
        lambda: f64,
        eps: f64,
    ) -> Result<Self> {
        validate(lambda, eps)?;
        let c_eps = normalization_constant(g, &z, &f, eps)?;
        let defect = normalization_residual(g, &z, &f, eps, c_eps)?;
        Ok(SolitonProblem {
            grid: *phi.grid(),
            logdet_g,
            phi,
            z,
            f,
            lambda,
            eps,
            c_eps,
            normalization_defect: defect,
            origin: ProblemOrigin::Datum,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn phi(&self) -> &RealField {
        &self.phi
    }

    pub fn z(&self) -> &HoloField {
        &self.z
    }

    pub fn f(&self) -> &RealField {
        &self.f
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn c_eps(&self) -> f64 {
        self.c_eps
    }

    /// Whether the mean-zero gauge is in force (`λ = 0`).
    pub fn mean_zero_gauge(&self) -> bool {
        self.lambda == 0.0
    }

    /// Left side of the normalization condition divided by the volume.
    /// Zero up to quadrature for datum problems; generally nonzero for
    /// manufactured ones, whose `c_ε` is fixed by the exact solution instead.
    pub fn normalization_defect(&self) -> f64 {
        self.normalization_defect
    }

    pub fn origin(&self) -> &ProblemOrigin {
        &self.origin
    }

    pub fn background(&self) -> Result<MetricField> {
        geometry::assemble_metric(&self.phi)
    }

    /// Same data with another ε; `c_ε` recomputed from the normalization.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let g = self.background()?;
        Self::datum(
            self.phi.clone(),
            &g,
            self.logdet_g.clone(),
            self.z.clone(),
            self.f.clone(),
            self.lambda,
            eps,
        )
    }
}

/// Datum `F` for which `u*` solves the equation exactly on the grid.
pub fn manufactured_problem(
    u_star: &RealField,
    phi: &RealField,
    z: &HoloField,
    lambda: f64,
    eps: f64,
) -> Result<SolitonProblem> {
    let total = phi.add(u_star)?;
    manufactured_from_hessian(u_star, &grid::ddbar(&total), phi, z, lambda, eps)
}

/// [`manufactured_problem`] at another ε, sharing the background and solution
/// of `prev`, which must itself be manufactured.
fn remanufacture(prev: &SolitonProblem, eps: f64) -> Result<SolitonProblem> {
    let ProblemOrigin::Manufactured { solution } = &prev.origin else {
        return Err(Error::State("problem is not manufactured".into()));
    };
    let total = prev.phi.add(solution)?;
    let g = prev.background()?;
    build_manufactured(
        solution.clone(),
        &grid::ddbar(&total),
        prev.phi.clone(),
        &g,
        prev.logdet_g.clone(),
        &prev.z,
        prev.lambda,
        eps,
    )
}

/// As [`manufactured_problem`], with the Hessian `∂∂̄(φ + u*)` supplied
/// (for instance in closed form for data that are not band-limited).
pub fn manufactured_from_hessian(
    u_star: &RealField,
    total_hessian: &HermitianField,
    phi: &RealField,
    z: &HoloField,
    lambda: f64,
    eps: f64,
) -> Result<SolitonProblem> {
    validate(lambda, eps)?;
    grid::same_grid(u_star.grid(), phi.grid())?;
    let g = geometry::assemble_metric(phi)?;
    let logdet_g = Arc::new(g.det().map(f64::ln));
    build_manufactured(
        Arc::new(u_star.clone()),
        total_hessian,
        Arc::new(phi.clone()),
        &g,
        logdet_g,
        z,
        lambda,
        eps,
    )
}

#[allow(clippy::too_many_arguments)]
fn build_manufactured(
    u_star: Arc<RealField>,
    total_hessian: &HermitianField,
    phi: Arc<RealField>,
    g: &MetricField,
    logdet_g: Arc<RealField>,
    z: &HoloField,
    lambda: f64,
    eps: f64,
) -> Result<SolitonProblem> {
    validate(lambda, eps)?;
    let grid = *phi.grid();
    let n = grid.n();
    let (min_eig, node) = par::argmin_indexed(grid.len(), |k| {
        total_hessian.at(k).add(&Herm::identity(n)).min_eig()
    });
    if !(min_eig > DEFAULT_POSITIVITY_FLOOR) {
        return Err(Error::NonPositiveMetric { node, min_eig });
    }
    let raw = RealField::from_vec(
        grid,
        par::map_indexed(grid.len(), |k| {
            let gt = total_hessian.at(k).add(&Herm::identity(n));
            gt.det().ln() - logdet_g.values()[k] - (gt.quad(z.coeffs()) + eps).ln()
                + lambda * u_star.values()[k]
        }),
    )?;
    let vol = grid::integrate(&RealField::constant(grid, 1.0), g.det())?;
    let c_eps = grid::integrate(&raw, g.det())? / vol;
    let f = raw.map(|x| x - c_eps);
    let defect = normalization_residual(g, z, &f, eps, c_eps)?;
    Ok(SolitonProblem {
        grid,
        phi,
        z: z.clone(),
        f: Arc::new(f),
        lambda,
        eps,
        c_eps,
        logdet_g,
        normalization_defect: defect,
        origin: ProblemOrigin::Manufactured { solution: u_star },
    })
}

/// Log residual `r(u)`.
pub fn residual(p: &SolitonProblem, u: &RealField) -> Result<RealField> {
    residual_with_floor(p, u, DEFAULT_POSITIVITY_FLOOR)
}

pub fn residual_with_floor(p: &SolitonProblem, u: &RealField, floor: f64) -> Result<RealField> {
    grid::same_grid(&p.grid, u.grid())?;
    RealField::from_vec(p.grid, kernel::residual(p, u.values(), floor)?)
}

/// `L[v]` at the iterate `u`.
pub fn linearize_apply(p: &SolitonProblem, u: &RealField, v: &RealField) -> Result<RealField> {
    grid::same_grid(&p.grid, u.grid())?;
    grid::same_grid(&p.grid, v.grid())?;
    let e = kernel::evaluate(p, u.values(), DEFAULT_POSITIVITY_FLOOR)?;
    RealField::from_vec(p.grid, kernel::apply_linear(p, &e.coef, v.values()))
}

/// `g̃_H^{ij̄}` at every node.
pub fn linearization_coefficients(p: &SolitonProblem, u: &RealField) -> Result<HermitianField> {
    let e = kernel::evaluate(p, u.values(), DEFAULT_POSITIVITY_FLOOR)?;
    let n = p.grid.n();
    Ok(HermitianField::from_fn(p.grid, |k| e.coef[k].to_herm(n)))
}

/// Newton controls.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolveOptions {
    pub max_newton_iters: usize,
    /// Max-norm tolerance on the (projected) log residual.
    pub residual_tol: f64,
    pub damping_factor: f64,
    pub max_halvings: usize,
    /// Relative 2-norm tolerance of each linear solve.
    pub linear_tol: f64,
    pub max_linear_iters: usize,
    pub positivity_floor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_newton_iters: 40,
            residual_tol: 1e-10,
            damping_factor: 0.5,
            max_halvings: 30,
            linear_tol: 1e-8,
            max_linear_iters: 500,
            positivity_floor: DEFAULT_POSITIVITY_FLOOR,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_newton_iters > 0
            && self.residual_tol > 0.0
            && self.residual_tol < 1.0
            && self.damping_factor > 0.0
            && self.damping_factor < 1.0
            && self.max_halvings > 0
            && self.linear_tol > 0.0
            && self.linear_tol < 1.0
            && self.max_linear_iters > 0
            && self.positivity_floor > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidProblem(format!(
                "invalid solver options {self:?}"
            )))
        }
    }
}

/// One accepted state of the Newton iteration (iteration 0 is the start).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Iterate {
    pub iteration: usize,
    /// Max-norm of the (projected) residual at this state.
    pub residual: f64,
    /// Step length that produced this state (0 for the start).
    pub step: f64,
    pub linear_iterations: usize,
    pub min_eig_metric: f64,
    /// Smallest eigenvalue of `g̃_H^{ij̄}` over the grid.
    pub min_eig_linearization: f64,
}

/// Result of a Newton solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub problem: Arc<SolitonProblem>,
    pub u: RealField,
    pub converged: bool,
    pub iterates: Vec<Iterate>,
    /// Grid mean of the final residual. Nonzero only under the mean-zero gauge,
    /// where it is the shift of `c_ε` realized by the solution.
    pub normalization_shift: f64,
    pub ledger: Option<EstimateLedger>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.iterates.last().map_or(f64::INFINITY, |i| i.residual)
    }

    /// Number of accepted Newton steps.
    pub fn newton_steps(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }
}

fn residual_norm(r: &[f64], mean_zero: bool) -> (f64, f64) {
    let mean = par::sum_indexed(r.len(), |i| r[i]) / r.len() as f64;
    let shift = if mean_zero { mean } else { 0.0 };
    (
        par::argmax_indexed(r.len(), |i| (r[i] - shift).abs()).0,
        mean,
    )
}

/// Damped Newton from `u0`.
pub fn newton_solve(
    p: Arc<SolitonProblem>,
    u0: &RealField,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    grid::same_grid(&p.grid, u0.grid())?;
    let gauge = p.mean_zero_gauge();
    if gauge && u0.mean().abs() > 1e-12 * (1.0 + u0.max_abs()) {
        return Err(Error::InvalidProblem(
            "initial guess must be mean-zero when lambda = 0".into(),
        ));
    }
    let mut u = u0.values().to_vec();
    let mut eval = kernel::evaluate(&p, &u, opts.positivity_floor)?;
    let (mut res, mut mean) = residual_norm(&eval.r, gauge);
    let mut iterates = vec![Iterate {
        iteration: 0,
        residual: res,
        step: 0.0,
        linear_iterations: 0,
        min_eig_metric: eval.min_eig_metric,
        min_eig_linearization: eval.min_eig_coef,
    }];
    let mut converged = res <= opts.residual_tol;
    let mut it = 0;
    while !converged && it < opts.max_newton_iters {
        it += 1;
        let mut rhs: Vec<f64> = eval.r.iter().map(|x| -x).collect();
        if gauge {
            krylov::project_mean_zero(&mut rhs);
        }
        let pre = krylov::Preconditioner::new(p.grid, kernel::mean_coef(&eval.coef), p.lambda);
        let coef = std::mem::take(&mut eval.coef);
        let op = |v_hat: &grid::Spectrum, v: &[f64]| {
            let mut out = kernel::apply_linear_spectral(&p, &coef, v_hat, v);
            if gauge {
                krylov::project_mean_zero(&mut out);
            }
            out
        };
        let lin = krylov::bicgstab(
            op,
            &pre,
            &rhs,
            opts.linear_tol,
            opts.max_linear_iters,
            gauge,
        )?;
        drop(rhs);
        drop(coef);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&lin.x).map(|(a, b)| a + step * b).collect();
            match kernel::evaluate(&p, &trial, opts.positivity_floor) {
                Ok(e) => {
                    let (r_try, m_try) = residual_norm(&e.r, gauge);
                    if r_try < res {
                        accepted = Some((trial, e, r_try, m_try));
                        break;
                    }
                }
                Err(Error::NonPositiveMetric { .. }) => {}
                Err(other) => return Err(other),
            }
            step *= opts.damping_factor;
        }
        let Some((trial, e, r_try, m_try)) = accepted else {
            return Err(Error::LineSearchFailed {
                halvings: opts.max_halvings,
                residual: res,
            });
        };
        u = trial;
        eval = e;
        res = r_try;
        mean = m_try;
        iterates.push(Iterate {
            iteration: it,
            residual: res,
            step,
            linear_iterations: lin.iterations,
            min_eig_metric: eval.min_eig_metric,
            min_eig_linearization: eval.min_eig_coef,
        });
        converged = res <= opts.residual_tol;
    }
    Ok(SolveReport {
        u: RealField::from_vec(p.grid, u)?,
        problem: p,
        converged,
        iterates,
        normalization_shift: if gauge { mean } else { 0.0 },
        ledger: None,
    })
}

/// A rule producing the problem at each ε of a continuation schedule.
#[derive(Debug, Clone)]
pub enum ProblemFamily {
    /// Fixed datum; `c_ε` recomputed per ε.
    Datum {
        phi: RealField,
        z: HoloField,
        f: RealField,
        lambda: f64,
    },
    /// Datum rebuilt per ε so that `u*` stays the exact solution.
    Manufactured {
        solution: RealField,
        phi: RealField,
        z: HoloField,
        lambda: f64,
    },
    /// Datum manufactured once at `eps_ref`, then held fixed.
    FrozenManufactured {
        solution: RealField,
        phi: RealField,
        z: HoloField,
        lambda: f64,
        eps_ref: f64,
    },
}

impl ProblemFamily {
    pub fn at(&self, eps: f64) -> Result<SolitonProblem> {
        match self {
            ProblemFamily::Datum { phi, z, f, lambda } => {
                SolitonProblem::new(phi.clone(), z.clone(), f.clone(), *lambda, eps)
            }
            ProblemFamily::Manufactured {
                solution,
                phi,
                z,
                lambda,
            } => manufactured_problem(solution, phi, z, *lambda, eps),
            ProblemFamily::FrozenManufactured {
                solution,
                phi,
                z,
                lambda,
                eps_ref,
            } => {
                let m = manufactured_problem(solution, phi, z, *lambda, *eps_ref)?;
                let f = m.f.map(|x| x + m.c_eps);
                let g = m.background()?;
                SolitonProblem::datum(m.phi, &g, m.logdet_g, m.z, Arc::new(f), *lambda, eps)
            }
        }
    }

    pub fn grid(&self) -> &GridSpec {
        match self {
            ProblemFamily::Datum { phi, .. }
            | ProblemFamily::Manufactured { phi, .. }
            | ProblemFamily::FrozenManufactured { phi, .. } => phi.grid(),
        }
    }
}

/// Reports of a continuation run; `failure` is set if it stopped early.
#[derive(Debug, Clone)]
pub struct ContinuationOutcome {
    pub reports: Vec<SolveReport>,
    pub failure: Option<Error>,
}

/// Checks that a schedule is positive and strictly decreasing.
pub fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidProblem("empty eps schedule".into()));
    }
    if schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidProblem(
            "eps schedule must be positive".into(),
        ));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidProblem(
            "eps schedule must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Solves along a decreasing ε schedule, warm-starting each point from the
/// previous solution. The first ε starts from `u0`.
pub fn continuation_solve(
    family: &ProblemFamily,
    schedule: &[f64],
    u0: &RealField,
    opts: &SolveOptions,
) -> Result<ContinuationOutcome> {
    validate_schedule(schedule)?;
    let mut reports: Vec<SolveReport> = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let start = reports.last().map_or(u0, |r| &r.u);
        // later points share the background fields of the first
        let problem = match (reports.first(), family) {
            (None, _) => family.at(eps),
            (Some(r), ProblemFamily::Manufactured { .. }) => remanufacture(&r.problem, eps),
            (Some(r), _) => r.problem.with_eps(eps),
        };
        let attempt = problem.and_then(|p| {
            let start = if p.mean_zero_gauge() {
                start.mean_free()
            } else {
                start.clone()
            };
            newton_solve(Arc::new(p), &start, opts)
        });
        let failure = match attempt {
            Ok(rep) if rep.converged => {
                reports.push(rep);
                None
            }
            Ok(rep) => Some(Error::NotConverged {
                iterations: rep.newton_steps(),
                residual: rep.final_residual(),
            }),
            Err(e) => Some(e),
        };
        if let Some(source) = failure {
            return Ok(ContinuationOutcome {
                reports,
                failure: Some(Error::Continuation {
                    eps,
                    source: Box::new(source),
                }),
            });
        }
    }
    Ok(ContinuationOutcome {
        reports,
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    fn flat_problem(n: usize, samples: usize, lambda: f64, eps: f64) -> SolitonProblem {
        let grid = GridSpec::standard(n, samples).unwrap();
        let z = HoloField::new(vec![C64::new(1.0, 0.0); n]).unwrap();
        SolitonProblem::new(
            RealField::zeros(grid),
            z,
            RealField::zeros(grid),
            lambda,
            eps,
        )
        .unwrap()
    }

    #[test]
    fn normalization_closed_forms() {
        let grid = GridSpec::standard(1, 16).unwrap();
        let g = MetricField::flat(grid);
        let f = RealField::zeros(grid);
        let half = HoloField::new(vec![C64::new(0.5f64.sqrt(), 0.0)]).unwrap();
        assert!(normalization_constant(&g, &half, &f, 0.5).unwrap().abs() < 1e-14);
        let one = HoloField::new(vec![C64::new(1.0, 0.0)]).unwrap();
        let c = normalization_constant(&g, &one, &f, 1.0).unwrap();
        assert!((c + 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn constant_data_residual_vanishes() {
        for lambda in [0.0, -1.0] {
            let p = flat_problem(2, 16, lambda, 0.3);
            let r = residual(&p, &RealField::zeros(*p.grid())).unwrap();
            assert!(r.max_abs() < 1e-14);
        }
    }

    #[test]
    fn constants_map_to_lambda() {
        let p = flat_problem(1, 16, -0.7, 0.2);
        let u = RealField::zeros(*p.grid());
        let lv = linearize_apply(&p, &u, &RealField::constant(*p.grid(), 1.0)).unwrap();
        assert!(lv.values().iter().all(|&x| (x + 0.7).abs() < 1e-14));
    }

    #[test]
    fn invalid_parameters() {
        let grid = GridSpec::standard(1, 16).unwrap();
        let z = HoloField::new(vec![C64::new(1.0, 0.0)]).unwrap();
        let phi = RealField::zeros(grid);
        assert!(SolitonProblem::new(phi.clone(), z.clone(), phi.clone(), 1.0, 0.1).is_err());
        assert!(SolitonProblem::new(phi.clone(), z, phi, -1.0, 0.0).is_err());
        assert!(validate_schedule(&[1.0, 1.0]).is_err());
        assert!(validate_schedule(&[1.0, 0.1, 0.2]).is_err());
        assert!(validate_schedule(&[1.0, 0.1]).is_ok());
    }
}
