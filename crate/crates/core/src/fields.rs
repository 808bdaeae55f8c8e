//! Constant holomorphic vector fields on the torus, their norms and
//! divergences, and pointwise identities evaluated as residuals.
//!
//! For `Z^k = a + ib` the real fields are `JV = ½(a∂_x + b∂_y)` and
//! `V = ½(b∂_x − a∂_y)` on each complex axis, so that `Z^k∂_k = JV + iV`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::{self, MetricField};
use crate::grid::{self, ComplexField, HermitianField, RealField, Spectrum};
use crate::linalg::Herm;
use crate::par;

/// Holomorphic field `Z = Z^k ∂/∂z^k` with constant coefficients.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct HoloField {
    z: Vec<C64>,
}

impl HoloField {
    pub fn new(z: Vec<C64>) -> Result<Self> {
        if z.is_empty() || z.len() > 2 {
            return Err(Error::Domain(format!(
                "holomorphic field needs 1 or 2 coefficients, got {}",
                z.len()
            )));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("non-finite coefficient".into()));
        }
        Ok(HoloField { z })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn scale(&self, a: C64) -> HoloField {
        HoloField {
            z: self.z.iter().map(|c| c * a).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.z.iter().all(|c| c.norm() == 0.0)
    }

    /// Components of `JV` along `(x¹, y¹, x², y²)`.
    pub fn jv(&self) -> Vec<f64> {
        self.z
            .iter()
            .flat_map(|c| [0.5 * c.re, 0.5 * c.im])
            .collect()
    }

    /// Components of `V` along `(x¹, y¹, x², y²)`.
    pub fn v(&self) -> Vec<f64> {
        self.z
            .iter()
            .flat_map(|c| [0.5 * c.im, -0.5 * c.re])
            .collect()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if self.z.len() != n {
            return Err(Error::Domain(format!(
                "field has {} coefficients on a grid of complex dimension {n}",
                self.z.len()
            )));
        }
        Ok(())
    }
}

/// `|Z|²_g = g_{kl̄} Z^k Z̄^l`.
pub fn z_norm_sq(g: &MetricField, z: &HoloField) -> Result<RealField> {
    z.check_dim(g.grid().n())?;
    RealField::from_vec(
        *g.grid(),
        par::map_indexed(g.grid().len(), |k| g.at(k).quad(&z.z)),
    )
}

/// `div Z = ∂_i Z^i + Γ^i_{ik} Z^k` with `Γ^i_{ik} = g^{il̄} ∂_k g_{il̄}`.
pub fn divergence(g: &MetricField, z: &HoloField) -> Result<ComplexField> {
    let n = g.grid().n();
    z.check_dim(n)?;
    let d3 = geometry::metric_first_derivatives(g);
    let vals = par::map_indexed(g.grid().len(), |node| {
        let m = g.inv_at(node);
        let mut s = C64::new(0.0, 0.0);
        for k in 0..n {
            for i in 0..n {
                for l in 0..n {
                    s += z.z[k] * m.get(i, l) * d3[(i * n + l) * n + k].values()[node];
                }
            }
        }
        s
    });
    ComplexField::from_vec(*g.grid(), vals)
}

/// `Ric(Z, Z̄) = R_{kl̄} Z^k Z̄^l`.
pub fn ricci_along(ric: &HermitianField, z: &HoloField) -> RealField {
    let grid = *ric.grid();
    RealField::from_vec(grid, par::map_indexed(grid.len(), |k| ric.at(k).quad(&z.z)))
        .expect("same grid")
}

/// Max nodewise `|u_{ij̄} Z^i Z̄^j − JV(JV(u))|`, the two sides of
/// `(√−1/2)∂∂̄u(V, JV) = ¼ JV(JV(u))` multiplied by 4.
pub fn check_vjv_identity(u: &RealField, z: &HoloField) -> Result<f64> {
    z.check_dim(u.grid().n())?;
    let h = grid::ddbar(u);
    let lhs = par::map_indexed(u.grid().len(), |k| h.at(k).quad(&z.z));
    let jv = z.jv();
    let once = grid::directional(&u.to_complex(), &jv);
    let twice = grid::directional(&once, &jv);
    Ok(par::argmax_indexed(lhs.len(), |k| (lhs[k] - twice.values()[k].re).abs()).0)
}

/// Max nodewise `|Z̄(div Z) + Ric(Z, Z̄)|`.
pub fn check_div_ricci(g: &MetricField, z: &HoloField) -> Result<f64> {
    let div = divergence(g, z)?;
    let lhs = zbar_derivative(&div, z);
    let ric = ricci_along(&geometry::ricci(g), z);
    Ok(par::argmax_indexed(ric.values().len(), |k| {
        (lhs.values()[k] + ric.values()[k]).norm()
    })
    .0)
}

/// `Z̄^l ∂_l̄ f`.
pub fn zbar_derivative(f: &ComplexField, z: &HoloField) -> ComplexField {
    let s = Spectrum::of_complex(f);
    let n = z.n();
    s.apply(|w| (0..n).map(|l| z.z[l].conj() * w.d_dzbar(l)).sum())
}

/// `Z^k ∂_k f`.
pub fn z_derivative(f: &ComplexField, z: &HoloField) -> ComplexField {
    let s = Spectrum::of_complex(f);
    let n = z.n();
    s.apply(|w| (0..n).map(|k| z.z[k] * w.d_dz(k)).sum())
}

/// The Hermitian form `∂∂̄ log(|Z|²_g + ε) + R(Z, Z̄, ·, ·)/(|Z|²_g + ε)` and
/// its smallest Euclidean eigenvalue over all nodes.
pub fn lemma41_form(g: &MetricField, z: &HoloField, eps: f64) -> Result<HermitianField> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let zn = z_norm_sq(g, z)?;
    let logz = zn.map(|v| (v + eps).ln());
    let h = grid::ddbar(&logz);
    let r = geometry::curvature(g).along(&z.z);
    Ok(HermitianField::from_fn(*g.grid(), |k| {
        h.at(k).add(&r.at(k).scale(1.0 / (zn.values()[k] + eps)))
    }))
}

pub fn lemma41_min_eig(g: &MetricField, z: &HoloField, eps: f64) -> Result<f64> {
    Ok(lemma41_form(g, z, eps)?.min_eig().0)
}

/// `(sup |Z(u)|, max |Im Z(u)|)` for a V-invariant real `u`.
///
/// Invariance means every Fourier mode `k` carrying weight has `k·V = 0`.
pub fn zhu_gap(u: &RealField, z: &HoloField) -> Result<(f64, f64)> {
    z.check_dim(u.grid().n())?;
    check_invariant(u, z, 1e-9)?;
    let zu = z_derivative(&u.to_complex(), z);
    Ok((zu.max_abs(), zu.max_imag()))
}

/// Errors with the offending modes if `u` has relative spectral weight above
/// `tol` on modes with `k·V ≠ 0`.
pub fn check_invariant(u: &RealField, z: &HoloField, tol: f64) -> Result<()> {
    let grid = *u.grid();
    let s = Spectrum::of_real(u);
    let c = s.coeffs();
    let total = par::argmax_indexed(c.len(), |i| c[i].norm()).0;
    if total == 0.0 {
        return Ok(());
    }
    let v = z.v();
    let mut bad = Vec::new();
    for (i, ci) in c.iter().enumerate() {
        if ci.norm() <= tol * total {
            continue;
        }
        let w = grid::Wave::new(&grid, i);
        let kv: f64 = (0..grid.real_dim()).map(|a| w.k[a] * v[a]).sum();
        if kv.abs() > 1e-12 * (1.0 + w.k.iter().map(|x| x.abs()).sum::<f64>()) {
            bad.push(grid.modes(i));
            if bad.len() >= 8 {
                break;
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::NotInvariant { modes: bad })
    }
}

/// `|div Z|² − Ric(Z, Z̄)` per node.
pub fn infimum_hypothesis(g: &MetricField, z: &HoloField) -> Result<RealField> {
    let div = divergence(g, z)?;
    let ric = ricci_along(&geometry::ricci(g), z);
    RealField::from_vec(
        *g.grid(),
        par::map_indexed(g.grid().len(), |k| {
            div.values()[k].norm_sqr() - ric.values()[k]
        }),
    )
}

/// `Z^i Z̄^j X_{ij̄}` at one node for a lower-index matrix.
pub fn along(m: &Herm, z: &HoloField) -> f64 {
    m.quad(&z.z)
}
