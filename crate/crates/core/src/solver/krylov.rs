//! Right-preconditioned BiCGStab with a constant-coefficient spectral
//! preconditioner.

use super::kernel::Coef;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Spectrum, Wave};
use crate::par;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    par::sum_indexed(a.len(), |i| a[i] * b[i])
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn project_mean_zero(v: &mut [f64]) {
    let m = par::sum_indexed(v.len(), |i| v[i]) / v.len() as f64;
    par::for_each_mut(v, |_, x| *x -= m);
}

/// Inverse of `v ↦ M̄ : ∂∂̄v + λv` for a constant Hermitian `M̄`.
/// When `λ = 0` the constant mode is mapped to zero.
pub(crate) struct Preconditioner {
    grid: GridSpec,
    mean: Coef,
    lambda: f64,
}

impl Preconditioner {
    pub fn new(grid: GridSpec, mean: Coef, lambda: f64) -> Self {
        Preconditioner { grid, mean, lambda }
    }

    fn symbol(&self, w: &Wave) -> f64 {
        let m = &self.mean;
        let mut s = m.a * w.ddbar(0, 0).re + self.lambda;
        if self.grid.n() == 2 {
            s += m.b * w.ddbar(1, 1).re + 2.0 * (m.c * w.ddbar(0, 1)).re;
        }
        s
    }

    /// `K⁻¹v` in spectral form; the `k = 0` mode is dropped when `λ = 0`,
    /// so the result is mean-zero in that case.
    pub fn apply_spectral(&self, v: &[f64]) -> Spectrum {
        let mut s = Spectrum::of_real_slice(self.grid, v);
        s.multiply(|w| {
            let sigma = self.symbol(w);
            if sigma == 0.0 {
                0.0.into()
            } else {
                (1.0 / sigma).into()
            }
        });
        s
    }
}

/// Outcome of one linear solve.
#[derive(Debug, Clone)]
pub(crate) struct LinearSolve {
    pub x: Vec<f64>,
    pub iterations: usize,
    #[allow(dead_code)]
    pub relative_residual: f64,
}

/// Solves `A x = b` to relative 2-norm tolerance `tol` with right
/// preconditioning. `op(ŷ, y)` applies `A` to `y` given also its spectrum.
pub(crate) fn bicgstab<A>(
    op: A,
    pre: &Preconditioner,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    mean_zero: bool,
) -> Result<LinearSolve>
where
    A: Fn(&Spectrum, &[f64]) -> Vec<f64>,
{
    let len = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; len];
    if bnorm == 0.0 {
        return Ok(LinearSolve {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    // returns (K⁻¹v, A K⁻¹v)
    let precond_apply = |v: &[f64]| {
        let s = pre.apply_spectral(v);
        let mut y = s.inverse_re();
        if mean_zero {
            project_mean_zero(&mut y);
        }
        let ay = op(&s, &y);
        (y, ay)
    };
    let mut r = b.to_vec();
    let r_hat = b.to_vec();
    let mut p = vec![0.0; len];
    let mut v = vec![0.0; len];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut rel = 1.0;
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        par::for_each_mut(&mut p, |i, pi| *pi = r[i] + beta * (*pi - omega * v[i]));
        let (p_hat, ap) = precond_apply(&p);
        v = ap;
        let denom = dot(&r_hat, &v);
        if denom == 0.0 {
            break;
        }
        alpha = rho / denom;
        par::for_each_mut(&mut x, |i, xi| *xi += alpha * p_hat[i]);
        drop(p_hat);
        par::for_each_mut(&mut r, |i, ri| *ri -= alpha * v[i]);
        rel = norm(&r) / bnorm;
        if rel <= tol {
            return Ok(LinearSolve {
                x,
                iterations: it,
                relative_residual: rel,
            });
        }
        let (s_hat, t) = precond_apply(&r);
        let tt = dot(&t, &t);
        omega = if tt == 0.0 { 0.0 } else { dot(&t, &r) / tt };
        par::for_each_mut(&mut x, |i, xi| *xi += omega * s_hat[i]);
        par::for_each_mut(&mut r, |i, ri| *ri -= omega * t[i]);
        rel = norm(&r) / bnorm;
        if rel <= tol {
            return Ok(LinearSolve {
                x,
                iterations: it,
                relative_residual: rel,
            });
        }
    }
    Err(Error::LinearSolveStalled {
        iterations: max_iter,
        relative_residual: rel,
    })
}
