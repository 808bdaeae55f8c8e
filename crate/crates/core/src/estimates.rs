//! A priori estimate quantities evaluated on converged solutions.
//!
//! `Δ` below is always the background Laplacian `g^{ij̄}∂_i∂_j̄`. Argmin and
//! argmax ties go to the lowest flat index.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{self, HoloField};
use crate::geometry::{self, MetricField};
use crate::grid::{self, RealField};
use crate::solver::{SolitonProblem, SolveReport};

/// Integral pair of the gradient inequality for one exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CherrierEntry {
    pub p: f64,
    /// `∫ |∂e^{−pu/2}|²_g ωⁿ`.
    pub lhs: f64,
    /// `p² ∫ e^{−(p−1)u} ωⁿ`.
    pub rhs_core: f64,
}

impl CherrierEntry {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs_core
    }
}

/// Both sides of `e^{−q inf u} ≤ C ∫ e^{−qu} ωⁿ` with `C = e^{q(sup u − inf u)}/Vol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoserEndpoint {
    pub q: f64,
    pub lhs: f64,
    pub integral: f64,
    pub constant: f64,
}

impl MoserEndpoint {
    pub fn holds(&self) -> bool {
        self.lhs <= self.constant * self.integral * (1.0 + 1e-12)
    }
}

/// Extremes of `u` and the min-point quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C0Ledger {
    pub inf_u: f64,
    pub sup_u: f64,
    /// `log((|Z|²_g̃ + ε) e^{F + c_ε + u})` at the grid argmin of `u`.
    pub minpoint_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplacianLedger {
    pub sup_lap_u: f64,
    pub sup_znorm_tilde: f64,
    pub fitted_c: f64,
}

/// Everything measurable on one converged solve. Entries that need `λ = −1`
/// or a V-invariant solution are `None` when the precondition fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateLedger {
    pub sup_u: f64,
    pub inf_u: f64,
    pub sup_lap_u: f64,
    pub sup_znorm_tilde: f64,
    pub fitted_c: f64,
    pub hypothesis_min: f64,
    pub minpoint_gap: Option<f64>,
    /// `−Δ_{g̃_H}|Z|²_g̃` at the grid argmax of `|Z|²_g̃`.
    pub maxpoint_witness: Option<f64>,
    pub zhu_sup: Option<f64>,
    pub zhu_imag: Option<f64>,
    pub cherrier: Vec<CherrierEntry>,
    /// Smallest constant covering every Cherrier entry.
    pub cherrier_constant: Option<f64>,
    pub moser: Option<MoserEndpoint>,
}

impl EstimateLedger {
    pub fn is_finite(&self) -> bool {
        let opt = |x: Option<f64>| x.is_none_or(f64::is_finite);
        [
            self.sup_u,
            self.inf_u,
            self.sup_lap_u,
            self.sup_znorm_tilde,
            self.fitted_c,
            self.hypothesis_min,
        ]
        .iter()
        .all(|x| x.is_finite())
            && opt(self.minpoint_gap)
            && opt(self.maxpoint_witness)
            && opt(self.zhu_sup)
            && opt(self.zhu_imag)
            && opt(self.cherrier_constant)
    }
}

/// Exponents used for the Cherrier cover.
pub const CHERRIER_EXPONENTS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

fn require_converged(report: &SolveReport) -> Result<()> {
    if report.converged {
        Ok(())
    } else {
        Err(Error::State("solve report is not converged".into()))
    }
}

fn require_lambda_minus_one(p: &SolitonProblem) -> Result<()> {
    if p.lambda() == -1.0 {
        Ok(())
    } else {
        Err(Error::State(format!(
            "estimate requires lambda = -1, got {}",
            p.lambda()
        )))
    }
}

/// Background metric and perturbed metric of a report.
fn metrics(report: &SolveReport) -> Result<(MetricField, MetricField)> {
    let g = report.problem.background()?;
    let gt = geometry::perturb_metric(&g, &report.u)?;
    Ok((g, gt))
}

pub fn c0_ledger(report: &SolveReport) -> Result<C0Ledger> {
    require_converged(report)?;
    let p = &report.problem;
    require_lambda_minus_one(p)?;
    let (_, gt) = metrics(report)?;
    Ok(c0_from(p, &report.u, &gt))
}

fn c0_from(p: &SolitonProblem, u: &RealField, gt: &MetricField) -> C0Ledger {
    let (inf_u, node) = u.argmin();
    let (sup_u, _) = u.argmax();
    let zn = gt.at(node).quad(p.z().coeffs());
    let gap = (zn + p.eps()).ln() + p.f().values()[node] + p.c_eps() + inf_u;
    C0Ledger {
        inf_u,
        sup_u,
        minpoint_gap: gap,
    }
}

pub fn laplacian_ledger(report: &SolveReport) -> Result<LaplacianLedger> {
    require_converged(report)?;
    let (g, gt) = metrics(report)?;
    laplacian_from(&g, &gt, report.problem.z(), &report.u)
}

fn laplacian_from(
    g: &MetricField,
    gt: &MetricField,
    z: &HoloField,
    u: &RealField,
) -> Result<LaplacianLedger> {
    let lap = geometry::laplacian(g, u)?;
    let sup_lap_u = lap.argmax().0;
    let sup_znorm_tilde = fields::z_norm_sq(gt, z)?.argmax().0;
    let fitted_c = sup_lap_u.max(0.0) / sup_znorm_tilde.max(1.0);
    Ok(LaplacianLedger {
        sup_lap_u,
        sup_znorm_tilde,
        fitted_c,
    })
}

pub fn znorm_ledger(report: &SolveReport) -> Result<f64> {
    require_converged(report)?;
    require_lambda_minus_one(&report.problem)?;
    let (_, gt) = metrics(report)?;
    Ok(fields::z_norm_sq(&gt, report.problem.z())?.argmax().0)
}

/// `−Δ_{g̃_H}(|Z|²_g̃)` at the grid argmax of `|Z|²_g̃`; a discrete maximum
/// principle makes it nonnegative up to truncation.
pub fn maxpoint_witness(report: &SolveReport) -> Result<f64> {
    require_converged(report)?;
    require_lambda_minus_one(&report.problem)?;
    let (_, gt) = metrics(report)?;
    maxpoint_from(&report.problem, &gt)
}

fn maxpoint_from(p: &SolitonProblem, gt: &MetricField) -> Result<f64> {
    let zn = fields::z_norm_sq(gt, p.z())?;
    let (_, node) = zn.argmax();
    let h = grid::ddbar(&zn);
    let coef = gt.inv_at(node).add(
        &crate::linalg::Herm::outer(p.z().coeffs()).scale(-1.0 / (zn.values()[node] + p.eps())),
    );
    Ok(-coef.contract(&h.at(node)))
}

pub fn cherrier_check(report: &SolveReport, p: f64) -> Result<CherrierEntry> {
    require_converged(report)?;
    require_lambda_minus_one(&report.problem)?;
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("exponent must be >= 1, got {p}")));
    }
    fields::check_invariant(&report.u, report.problem.z(), 1e-9)?;
    let g = report.problem.background()?;
    cherrier_from(&g, &report.u, p)
}

fn cherrier_from(g: &MetricField, u: &RealField, p: f64) -> Result<CherrierEntry> {
    let f = u.map(|x| (-0.5 * p * x).exp());
    let lhs = grid::integrate(&geometry::grad_norm_sq(g, &f)?, g.det())?;
    let e = u.map(|x| (-(p - 1.0) * x).exp());
    let rhs_core = p * p * grid::integrate(&e, g.det())?;
    Ok(CherrierEntry { p, lhs, rhs_core })
}

pub fn moser_endpoint(report: &SolveReport, q: f64) -> Result<MoserEndpoint> {
    require_converged(report)?;
    require_lambda_minus_one(&report.problem)?;
    let g = report.problem.background()?;
    moser_from(&g, &report.u, q)
}

fn moser_from(g: &MetricField, u: &RealField, q: f64) -> Result<MoserEndpoint> {
    let (inf_u, _) = u.argmin();
    let (sup_u, _) = u.argmax();
    let vol = grid::integrate(&RealField::constant(*g.grid(), 1.0), g.det())?;
    let integral = grid::integrate(&u.map(|x| (-q * x).exp()), g.det())?;
    Ok(MoserEndpoint {
        q,
        lhs: (-q * inf_u).exp(),
        integral,
        constant: (q * (sup_u - inf_u)).exp() / vol,
    })
}

pub fn hypothesis_ledger(problem: &SolitonProblem) -> Result<f64> {
    let g = problem.background()?;
    Ok(fields::infimum_hypothesis(&g, problem.z())?.argmin().0)
}

/// Evaluates every applicable estimate on a converged report.
pub fn full_ledger(report: &SolveReport) -> Result<EstimateLedger> {
    require_converged(report)?;
    let p = &report.problem;
    let u = &report.u;
    let (g, gt) = metrics(report)?;
    let lap = laplacian_from(&g, &gt, p.z(), u)?;
    let hypothesis_min = fields::infimum_hypothesis(&g, p.z())?.argmin().0;
    let lm1 = p.lambda() == -1.0;
    let c0 = c0_from(p, u, &gt);
    let invariant = fields::check_invariant(u, p.z(), 1e-9).is_ok();
    let (zhu_sup, zhu_imag) = if invariant {
        let (s, i) = fields::zhu_gap(u, p.z())?;
        (Some(s), Some(i))
    } else {
        (None, None)
    };
    let cherrier = if lm1 && invariant {
        CHERRIER_EXPONENTS
            .iter()
            .map(|&q| cherrier_from(&g, u, q))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let cherrier_constant = if cherrier.is_empty() {
        None
    } else {
        Some(cherrier.iter().map(|c| c.ratio()).fold(0.0, f64::max))
    };
    Ok(EstimateLedger {
        sup_u: c0.sup_u,
        inf_u: c0.inf_u,
        sup_lap_u: lap.sup_lap_u,
        sup_znorm_tilde: lap.sup_znorm_tilde,
        fitted_c: lap.fitted_c,
        hypothesis_min,
        minpoint_gap: lm1.then_some(c0.minpoint_gap),
        maxpoint_witness: if lm1 {
            Some(maxpoint_from(p, &gt)?)
        } else {
            None
        },
        zhu_sup,
        zhu_imag,
        cherrier,
        cherrier_constant,
        moser: if lm1 {
            Some(moser_from(&g, u, 2.0)?)
        } else {
            None
        },
    })
}

/// Ratio `max/min` of a positive sweep statistic; `1` means perfectly uniform.
pub fn variation(values: &[f64]) -> f64 {
    let mx = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mn = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if mn > 0.0 {
        mx / mn
    } else if mx == mn {
        1.0
    } else {
        f64::INFINITY
    }
}
