//! Kähler metrics `g = c·δ + ∂∂̄φ` on the flat torus and their curvature.
//!
//! Index conventions: a metric is stored by its lower-index matrix
//! `G[i][j] = g_{ij̄}`. The upper-index inverse `g^{ij̄}` is the matrix
//! `conj(G⁻¹)`, so `Σ g^{ij̄} X_{ij̄}` is [`Herm::contract`] of it with `X`.
//! `ωⁿ` is identified with `det g` times Lebesgue measure.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{
    self, AliasGuard, ComplexField, GridSpec, HermitianField, RealField, Spectrum, Wave,
};
use crate::linalg::Herm;
use crate::par;

pub const DEFAULT_POSITIVITY_FLOOR: f64 = 1e-8;

/// Positive metric `g = c·δ + ∂∂̄φ` with its potential and determinant.
///
/// The upper-index inverse is recomputed per node in closed form rather than
/// stored; at n = 2, N = 64 every stored real field costs 134 MB.
#[derive(Debug, Clone)]
pub struct MetricField {
    base: f64,
    potential: RealField,
    g: HermitianField,
    det: RealField,
}

impl MetricField {
    fn from_hessian(
        base: f64,
        potential: RealField,
        hess: HermitianField,
        floor: f64,
    ) -> Result<Self> {
        let g = hess.map(|_, m| m.add(&Herm::identity(m.n).scale(base)));
        let (min_eig, node) = g.min_eig();
        if !(min_eig > floor) {
            return Err(Error::NonPositiveMetric { node, min_eig });
        }
        let det = RealField::from_vec(
            *potential.grid(),
            par::map_indexed(potential.grid().len(), |k| g.at(k).det()),
        )?;
        Ok(MetricField {
            base,
            potential,
            g,
            det,
        })
    }

    pub fn flat(grid: GridSpec) -> Self {
        MetricField {
            base: 1.0,
            potential: RealField::zeros(grid),
            g: HermitianField::identity(grid),
            det: RealField::constant(grid, 1.0),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.potential.grid()
    }

    /// The metric `s·g`, i.e. background `s·base·δ` and potential `s·φ`.
    pub fn scaled(&self, s: f64, floor: f64) -> Result<MetricField> {
        let hess = self
            .g
            .map(|_, m| m.add(&Herm::identity(m.n).scale(-self.base)).scale(s));
        MetricField::from_hessian(self.base * s, self.potential.scale(s), hess, floor)
    }

    /// Multiple of `δ` underlying the potential (1 unless rescaled).
    pub fn base(&self) -> f64 {
        self.base
    }

    /// Total potential relative to the flat metric.
    pub fn potential(&self) -> &RealField {
        &self.potential
    }

    pub fn g(&self) -> &HermitianField {
        &self.g
    }

    pub fn det(&self) -> &RealField {
        &self.det
    }

    /// Lower-index matrix at one node.
    pub fn at(&self, node: usize) -> Herm {
        self.g.at(node)
    }

    /// Upper-index matrix `g^{ij̄}` at one node.
    pub fn inv_at(&self, node: usize) -> Herm {
        self.g.at(node).inverse().conj()
    }

    /// Upper-index field `g^{ij̄}`.
    pub fn inv(&self) -> HermitianField {
        HermitianField::from_fn(*self.grid(), |k| self.inv_at(k))
    }

    pub fn min_eig(&self) -> (f64, usize) {
        self.g.min_eig()
    }
}

/// `g = δ + ∂∂̄φ` with the default anti-aliasing guard and positivity floor.
pub fn assemble_metric(phi: &RealField) -> Result<MetricField> {
    assemble_metric_with(phi, &AliasGuard::default(), DEFAULT_POSITIVITY_FLOOR)
}

pub fn assemble_metric_with(
    phi: &RealField,
    guard: &AliasGuard,
    floor: f64,
) -> Result<MetricField> {
    guard.check(phi)?;
    MetricField::from_hessian(1.0, phi.clone(), grid::ddbar(phi), floor)
}

/// `g̃ = g + ∂∂̄u`.
pub fn perturb_metric(g: &MetricField, u: &RealField) -> Result<MetricField> {
    perturb_metric_with(g, u, DEFAULT_POSITIVITY_FLOOR)
}

pub fn perturb_metric_with(g: &MetricField, u: &RealField, floor: f64) -> Result<MetricField> {
    let total = g.potential.add(u)?;
    let hess = grid::ddbar(&total);
    MetricField::from_hessian(g.base, total, hess, floor)
}

/// `det g̃ / det g`, the density of `ω̃ⁿ` against `ωⁿ`.
pub fn det_ratio(gt: &MetricField, g: &MetricField) -> Result<RealField> {
    gt.det.zip_map(&g.det, |a, b| a / b)
}

/// `R_{kl̄} = −∂_k∂_l̄ log det g`.
pub fn ricci(g: &MetricField) -> HermitianField {
    let logdet = g.det.map(f64::ln);
    grid::ddbar(&logdet).map(|_, m| m.scale(-1.0))
}

/// `Δf = g^{ij̄} f_{ij̄}`.
pub fn laplacian(g: &MetricField, f: &RealField) -> Result<RealField> {
    grid::same_grid(g.grid(), f.grid())?;
    let h = grid::ddbar(f);
    RealField::from_vec(
        *f.grid(),
        par::map_indexed(f.grid().len(), |k| g.inv_at(k).contract(&h.at(k))),
    )
}

/// `∂_i f` for every complex axis.
pub fn gradient(f: &RealField) -> Vec<ComplexField> {
    let s = Spectrum::of_real(f);
    (0..f.grid().n()).map(|i| s.apply(|w| w.d_dz(i))).collect()
}

/// `g^{ij̄} f_i h_j̄` for real `f`, `h`.
pub fn grad_pair(g: &MetricField, f: &RealField, h: &RealField) -> Result<ComplexField> {
    grid::same_grid(g.grid(), f.grid())?;
    grid::same_grid(g.grid(), h.grid())?;
    let df = gradient(f);
    let dh = gradient(h);
    let n = g.grid().n();
    let vals = par::map_indexed(g.grid().len(), |k| {
        let m = g.inv_at(k);
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += m.get(i, j) * df[i].values()[k] * dh[j].values()[k].conj();
            }
        }
        s
    });
    ComplexField::from_vec(*g.grid(), vals)
}

/// `|∂f|²_g = g^{ij̄} f_i f_j̄` for real `f`.
pub fn grad_norm_sq(g: &MetricField, f: &RealField) -> Result<RealField> {
    grid::same_grid(g.grid(), f.grid())?;
    let df = gradient(f);
    let n = g.grid().n();
    RealField::from_vec(
        *f.grid(),
        par::map_indexed(f.grid().len(), |k| {
            let v: Vec<C64> = (0..n).map(|i| df[i].values()[k]).collect();
            g.inv_at(k).quad(&v)
        }),
    )
}

/// `tr_ω ω̃ = g^{ij̄} g̃_{ij̄}`.
pub fn trace_metric(g: &MetricField, gt: &MetricField) -> Result<RealField> {
    grid::same_grid(g.grid(), gt.grid())?;
    RealField::from_vec(
        *g.grid(),
        par::map_indexed(g.grid().len(), |k| g.inv_at(k).contract(&gt.at(k))),
    )
}

/// Full curvature tensor `R_{ij̄kl̄}` per node.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    grid: GridSpec,
    n: usize,
    r: Vec<C64>,
}

impl CurvatureField {
    fn slot(&self, node: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
        let n = self.n;
        node * n.pow(4) + ((i * n + j) * n + k) * n + l
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `R_{ij̄kl̄}` at a node.
    pub fn get(&self, node: usize, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.r[self.slot(node, i, j, k, l)]
    }

    /// `g^{ij̄} R_{ij̄kl̄}`, which equals the Ricci form.
    pub fn contract_first_pair(&self, g: &MetricField) -> HermitianField {
        let n = self.n;
        HermitianField::from_fn(self.grid, |node| {
            let m = g.inv_at(node);
            let e = |k: usize, l: usize| {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        s += m.get(i, j) * self.get(node, i, j, k, l);
                    }
                }
                s
            };
            if n == 1 {
                Herm::scalar(e(0, 0).re)
            } else {
                Herm::two(e(0, 0).re, e(1, 1).re, e(0, 1))
            }
        })
    }

    /// `R(v, v̄, ·, ·)_{kl̄} = R_{ij̄kl̄} v^i v̄^j`.
    pub fn along(&self, v: &[C64]) -> HermitianField {
        let n = self.n;
        HermitianField::from_fn(self.grid, |node| {
            let e = |k: usize, l: usize| {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        s += v[i] * v[j].conj() * self.get(node, i, j, k, l);
                    }
                }
                s
            };
            if n == 1 {
                Herm::scalar(e(0, 0).re)
            } else {
                Herm::two(e(0, 0).re, e(1, 1).re, e(0, 1))
            }
        })
    }

    /// Largest deviation from `R_{ij̄kl̄} = conj R_{jīlk̄}` and
    /// `R_{ij̄kl̄} = R_{kj̄il̄}`, relative to the largest entry.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let nodes = self.grid.len();
        let scale = par::argmax_indexed(self.r.len(), |s| self.r[s].norm())
            .0
            .max(1e-300);
        let worst = par::argmax_indexed(nodes, |node| {
            let mut w: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let r = self.get(node, i, j, k, l);
                            w = w.max((r - self.get(node, j, i, l, k).conj()).norm());
                            w = w.max((r - self.get(node, k, j, i, l)).norm());
                            w = w.max((r - self.get(node, k, l, i, j)).norm());
                        }
                    }
                }
            }
            w
        })
        .0;
        worst / scale
    }
}

/// Third derivatives `∂_k g_{ij̄} = φ_{ij̄k}`, indexed `[(i*n + j)*n + k]`.
pub(crate) fn metric_first_derivatives(g: &MetricField) -> Vec<ComplexField> {
    let n = g.grid().n();
    let s = Spectrum::of_real(&g.potential);
    let mut out: Vec<ComplexField> = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // symmetric in (i, k)
                let f = if k < i {
                    out[(k * n + j) * n + i].clone()
                } else {
                    s.apply(|w| w.d_dz(i) * w.d_dzbar(j) * w.d_dz(k))
                };
                out.push(f);
            }
        }
    }
    out
}

/// `R_{ij̄kl̄} = −∂_k∂_l̄ g_{ij̄} + g^{st̄} (∂_k g_{it̄})(∂_l̄ g_{sj̄})`.
pub fn curvature(g: &MetricField) -> CurvatureField {
    let grid = *g.grid();
    let n = grid.n();
    let s = Spectrum::of_real(&g.potential);
    let sym4 = |w: &Wave, i: usize, j: usize, k: usize, l: usize| {
        w.d_dz(i) * w.d_dzbar(j) * w.d_dz(k) * w.d_dzbar(l)
    };
    // φ_{ij̄kl̄} is symmetric in (i, k) and in (j, l); compute each class once
    let idx4 = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    let mut d4: Vec<Option<ComplexField>> = vec![None; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in i..n {
                for l in j..n {
                    d4[idx4(i, j, k, l)] = Some(s.apply(|w| sym4(w, i, j, k, l)));
                }
            }
        }
    }
    let d4: Vec<&ComplexField> = (0..n.pow(4))
        .map(|m| {
            let (l, k, j, i) = (m % n, m / n % n, m / n / n % n, m / n / n / n);
            d4[idx4(i.min(k), j.min(l), i.max(k), j.max(l))]
                .as_ref()
                .expect("computed")
        })
        .collect();
    let d3 = metric_first_derivatives(g);
    let a = |node: usize, i: usize, j: usize, k: usize| d3[(i * n + j) * n + k].values()[node];
    let per = n.pow(4);
    let mut r = vec![C64::new(0.0, 0.0); grid.len() * per];
    par::for_each_chunk_mut(&mut r, per, |node, out| {
        let m = g.inv_at(node);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let idx = ((i * n + j) * n + k) * n + l;
                        let mut v = -d4[idx].values()[node];
                        for s_ in 0..n {
                            for t in 0..n {
                                // ∂_l̄ g_{sj̄} = conj(∂_l g_{js̄})
                                v += m.get(s_, t) * a(node, i, t, k) * a(node, j, s_, l).conj();
                            }
                        }
                        out[idx] = v;
                    }
                }
            }
        }
    });
    CurvatureField { grid, n, r }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_potential_gives_identity() {
        let grid = GridSpec::standard(2, 16).unwrap();
        let g = assemble_metric(&RealField::zeros(grid)).unwrap();
        assert!(g.g().max_abs_diff(&HermitianField::identity(grid)).unwrap() < 1e-15);
        assert!(ricci(&g).max_abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_metric_value() {
        let grid = GridSpec::standard(1, 32).unwrap();
        let phi = RealField::from_fn(grid, |x| 0.5 * x[0].cos());
        let g = assemble_metric(&phi).unwrap();
        for k in 0..grid.len() {
            let x = grid.coords(k)[0];
            assert!((g.at(k).a - (1.0 - 0.125 * x.cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn large_potential_is_rejected() {
        let grid = GridSpec::standard(1, 32).unwrap();
        let phi = RealField::from_fn(grid, |x| 5.0 * x[0].cos());
        match assemble_metric(&phi) {
            Err(Error::NonPositiveMetric { node, min_eig }) => {
                assert!(min_eig < 0.0);
                // worst node is x = 0 where 1 − 1.25 cos x is smallest
                assert_eq!(grid.axis_indices(node)[0], 0);
            }
            other => panic!("expected NonPositiveMetric, got {other:?}"),
        }
    }

    #[test]
    fn trace_of_scaled_metric() {
        let grid = GridSpec::standard(2, 16).unwrap();
        let phi = RealField::from_fn(grid, |x| 0.2 * (x[0] + x[3]).cos());
        let g = assemble_metric(&phi).unwrap();
        let t = trace_metric(&g, &g).unwrap();
        assert!(t.values().iter().all(|&v| (v - 2.0).abs() < 1e-13));
        let t2 = trace_metric(&g, &g.scaled(2.0, 1e-8).unwrap()).unwrap();
        assert!(t2.values().iter().all(|&v| (v - 4.0).abs() < 1e-13));
    }
}
