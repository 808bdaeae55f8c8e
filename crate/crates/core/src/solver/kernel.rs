//! Fused nodewise evaluation of the log residual and its linearization.
//!
//! Nothing here materializes a `MetricField`: the perturbed metric is formed
//! node by node from one spectral Hessian of `φ + u`.

use num_complex::Complex64 as C64;

use super::SolitonProblem;
use crate::error::{Error, Result};
use crate::grid::{HermitianField, Spectrum};
use crate::linalg::Herm;
use crate::par;

/// Upper-index coefficient `g̃^{ij̄} − Z^i Z̄^j / (|Z|²_g̃ + ε)` at one node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coef {
    pub a: f64,
    pub b: f64,
    pub c: C64,
}

impl Coef {
    fn from_herm(m: &Herm) -> Coef {
        Coef {
            a: m.a,
            b: m.b,
            c: m.c,
        }
    }

    pub fn to_herm(self, n: usize) -> Herm {
        if n == 1 {
            Herm::scalar(self.a)
        } else {
            Herm::two(self.a, self.b, self.c)
        }
    }
}

/// Residual and linearization data at one iterate.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub r: Vec<f64>,
    pub coef: Vec<Coef>,
    /// Smallest eigenvalue of `g̃` over all nodes.
    pub min_eig_metric: f64,
    /// Smallest eigenvalue of the linearization coefficient over all nodes.
    pub min_eig_coef: f64,
}

/// Hessian `∂∂̄(φ + u)` of the total potential.
pub(crate) fn total_hessian(p: &SolitonProblem, u: &[f64]) -> HermitianField {
    let phi = p.phi.values();
    let w = par::map_indexed(u.len(), |k| phi[k] + u[k]);
    Spectrum::of_real_slice(p.grid, &w).ddbar()
}

/// Metric `g̃ = δ + ∂∂̄(φ + u)` at a node.
pub(crate) fn metric_at(h: &HermitianField, k: usize) -> Herm {
    let m = h.at(k);
    m.add(&Herm::identity(m.n))
}

fn check_positive(h: &HermitianField, floor: f64) -> Result<f64> {
    let (min_eig, node) = par::argmin_indexed(h.grid().len(), |k| metric_at(h, k).min_eig());
    if !(min_eig > floor) {
        return Err(Error::NonPositiveMetric { node, min_eig });
    }
    Ok(min_eig)
}

/// Log residual only.
pub(crate) fn residual(p: &SolitonProblem, u: &[f64], floor: f64) -> Result<Vec<f64>> {
    let h = total_hessian(p, u);
    check_positive(&h, floor)?;
    Ok(par::map_indexed(u.len(), |k| {
        node_residual(p, &metric_at(&h, k), u[k], k)
    }))
}

fn node_residual(p: &SolitonProblem, g: &Herm, u: f64, k: usize) -> f64 {
    let zn = g.quad(p.z.coeffs());
    g.det().ln() - p.logdet_g.values()[k] - (zn + p.eps).ln() - p.f.values()[k] - p.c_eps
        + p.lambda * u
}

fn node_coef(p: &SolitonProblem, g: &Herm) -> Herm {
    let zn = g.quad(p.z.coeffs());
    g.inverse()
        .conj()
        .add(&Herm::outer(p.z.coeffs()).scale(-1.0 / (zn + p.eps)))
}

/// Residual plus linearization coefficients.
pub(crate) fn evaluate(p: &SolitonProblem, u: &[f64], floor: f64) -> Result<Evaluation> {
    let h = total_hessian(p, u);
    let min_eig_metric = check_positive(&h, floor)?;
    let n = p.grid.n();
    let coef = par::map_indexed(u.len(), |k| {
        Coef::from_herm(&node_coef(p, &metric_at(&h, k)))
    });
    let r = par::map_indexed(u.len(), |k| node_residual(p, &metric_at(&h, k), u[k], k));
    drop(h);
    let min_eig_coef = par::argmin_indexed(coef.len(), |k| coef[k].to_herm(n).min_eig()).0;
    Ok(Evaluation {
        r,
        coef,
        min_eig_metric,
        min_eig_coef,
    })
}

/// `L v = Σ M_ij v_{ij̄} + λ v`.
pub(crate) fn apply_linear(p: &SolitonProblem, coef: &[Coef], v: &[f64]) -> Vec<f64> {
    apply_linear_spectral(p, coef, &Spectrum::of_real_slice(p.grid, v), v)
}

/// [`apply_linear`] given both the spectrum and the samples of `v`. The
/// Hessian entries are streamed into the contraction one inverse at a time.
pub(crate) fn apply_linear_spectral(
    p: &SolitonProblem,
    coef: &[Coef],
    v_hat: &Spectrum,
    v: &[f64],
) -> Vec<f64> {
    let lambda = p.lambda;
    if p.grid.n() == 1 {
        let d = v_hat.apply_raw(|w| w.ddbar(0, 0));
        return par::map_indexed(v.len(), |k| coef[k].a * d[k].re + lambda * v[k]);
    }
    let i = C64::new(0.0, 1.0);
    let diag = v_hat.apply_raw(|w| w.ddbar(0, 0) + i * w.ddbar(1, 1));
    let mut out = par::map_indexed(v.len(), |k| {
        coef[k].a * diag[k].re + coef[k].b * diag[k].im + lambda * v[k]
    });
    drop(diag);
    let off = v_hat.apply_raw(|w| w.ddbar(0, 1));
    par::for_each_mut(&mut out, |k, o| *o += 2.0 * (coef[k].c * off[k]).re);
    out
}

/// Mean of the coefficient field, the constant-coefficient model operator.
pub(crate) fn mean_coef(coef: &[Coef]) -> Coef {
    let len = coef.len() as f64;
    Coef {
        a: par::sum_indexed(coef.len(), |k| coef[k].a) / len,
        b: par::sum_indexed(coef.len(), |k| coef[k].b) / len,
        c: C64::new(
            par::sum_indexed(coef.len(), |k| coef[k].c.re) / len,
            par::sum_indexed(coef.len(), |k| coef[k].c.im) / len,
        ),
    }
}
