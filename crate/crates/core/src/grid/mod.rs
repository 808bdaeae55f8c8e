//! Periodic uniform grids on the real torus `ℂⁿ/Λ` (square lattice) and exact
//! spectral calculus on band-limited samples.
//!
//! Real axes are ordered `(x¹, y¹, x², y²)` with `zᵏ = xᵏ + i yᵏ`; node indices
//! are row-major with axis 0 slowest.

mod fft;
mod spectral;

pub use spectral::{Spectrum, Wave};

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Herm;
use crate::par;

/// Discretization of a flat torus of complex dimension 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GridSpec {
    n: usize,
    samples: usize,
    period: f64,
}

impl GridSpec {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(n: usize, samples: usize, period: f64) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidGrid(format!(
                "complex dimension must be 1 or 2, got {n}"
            )));
        }
        if samples < Self::MIN_SAMPLES || !samples.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "samples per axis must be a power of two >= {}, got {samples}",
                Self::MIN_SAMPLES
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(GridSpec { n, samples, period })
    }

    /// Grid with the default period 2π.
    pub fn standard(n: usize, samples: usize) -> Result<Self> {
        Self::new(n, samples, std::f64::consts::TAU)
    }

    /// Complex dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Samples per real axis.
    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    /// Total node count `N^(2n)`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.real_dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.samples as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.real_dim() as i32)
    }

    /// Lebesgue volume of the torus.
    pub fn volume(&self) -> f64 {
        self.period.powi(self.real_dim() as i32)
    }

    /// Per-axis integer indices of a node (first `2n` entries valid).
    pub fn axis_indices(&self, idx: usize) -> [usize; 4] {
        let d = self.real_dim();
        let shift = self.samples.trailing_zeros();
        let mask = self.samples - 1;
        let mut out = [0usize; 4];
        let mut rem = idx;
        for a in (0..d).rev() {
            out[a] = rem & mask;
            rem >>= shift;
        }
        out
    }

    pub fn flat_index(&self, axes: &[usize]) -> usize {
        axes.iter()
            .take(self.real_dim())
            .fold(0usize, |acc, &i| acc * self.samples + (i % self.samples))
    }

    /// Real coordinates of a node (first `2n` entries valid).
    pub fn coords(&self, idx: usize) -> [f64; 4] {
        let ai = self.axis_indices(idx);
        let h = self.spacing();
        let mut x = [0.0; 4];
        for a in 0..self.real_dim() {
            x[a] = ai[a] as f64 * h;
        }
        x
    }

    /// Signed Fourier mode number for a per-axis index.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.samples as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Signed mode numbers of a spectral index.
    pub fn modes(&self, idx: usize) -> Vec<i64> {
        let ai = self.axis_indices(idx);
        (0..self.real_dim()).map(|a| self.mode(ai[a])).collect()
    }

    /// Angular wavenumber per unit mode.
    pub fn base_wavenumber(&self) -> f64 {
        std::f64::consts::TAU / self.period
    }

    fn ensure_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.n {
            Err(Error::AxisOutOfRange { axis, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// Real scalar sampled at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

/// Complex scalar sampled at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<C64>,
}

impl RealField {
    pub fn from_vec(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(RealField { grid, values })
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        RealField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at node coordinates.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let d = grid.real_dim();
        let values = par::map_indexed(grid.len(), |i| {
            let x = grid.coords(i);
            f(&x[..d])
        });
        RealField { grid, values }
    }

    /// Nodewise map of one field.
    pub fn map<F>(&self, f: F) -> RealField
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let v = &self.values;
        RealField {
            grid: self.grid,
            values: par::map_indexed(v.len(), |i| f(v[i])),
        }
    }

    /// Nodewise combination of two fields on the same grid.
    pub fn zip_map<F>(&self, other: &RealField, f: F) -> Result<RealField>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        same_grid(&self.grid, &other.grid)?;
        let (a, b) = (&self.values, &other.values);
        Ok(RealField {
            grid: self.grid,
            values: par::map_indexed(a.len(), |i| f(a[i], b[i])),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn add(&self, other: &RealField) -> Result<RealField> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealField) -> Result<RealField> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> RealField {
        self.map(|x| s * x)
    }

    pub fn max_abs(&self) -> f64 {
        par::argmax_indexed(self.values.len(), |i| self.values[i].abs()).0
    }

    /// Maximum value and the lowest node attaining it.
    pub fn argmax(&self) -> (f64, usize) {
        par::argmax_indexed(self.values.len(), |i| self.values[i])
    }

    /// Minimum value and the lowest node attaining it.
    pub fn argmin(&self) -> (f64, usize) {
        par::argmin_indexed(self.values.len(), |i| self.values[i])
    }

    /// Unweighted grid mean.
    pub fn mean(&self) -> f64 {
        par::sum_indexed(self.values.len(), |i| self.values[i]) / self.values.len() as f64
    }

    /// Subtracts the grid mean.
    pub fn mean_free(&self) -> RealField {
        let m = self.mean();
        self.map(|x| x - m)
    }

    /// Random real field whose Fourier content lies in `|mode| <= max_mode` on
    /// every axis, with coefficients decaying like `exp(-|k|/2)`, rescaled to
    /// `max |f| = amplitude`.
    pub fn random_band_limited<R: Rng + ?Sized>(
        grid: GridSpec,
        max_mode: usize,
        amplitude: f64,
        rng: &mut R,
    ) -> RealField {
        let d = grid.real_dim();
        let mut spec = vec![C64::new(0.0, 0.0); grid.len()];
        let m = max_mode as i64;
        let side = (2 * m + 1) as usize;
        let count = side.pow(d as u32);
        for t in 0..count {
            let mut rem = t;
            let mut axes = [0usize; 4];
            let mut norm2 = 0.0;
            for a in (0..d).rev() {
                let k = (rem % side) as i64 - m;
                rem /= side;
                norm2 += (k * k) as f64;
                axes[a] = k.rem_euclid(grid.samples() as i64) as usize;
            }
            let w = (-0.5 * norm2.sqrt()).exp();
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            spec[grid.flat_index(&axes[..d])] = C64::new(re, im) * w;
        }
        let f = Spectrum::from_coeffs(grid, spec).inverse();
        let mut out = RealField {
            grid,
            values: f.values.iter().map(|z| z.re).collect(),
        };
        let mx = out.max_abs();
        if mx > 0.0 {
            out = out.scale(amplitude / mx);
        }
        out
    }
}

impl ComplexField {
    pub fn from_vec(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> C64 + Sync + Send,
    {
        let d = grid.real_dim();
        let values = par::map_indexed(grid.len(), |i| {
            let x = grid.coords(i);
            f(&x[..d])
        });
        ComplexField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn conj(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn re(&self) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.re).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        par::argmax_indexed(self.values.len(), |i| self.values[i].norm()).0
    }

    pub fn max_imag(&self) -> f64 {
        par::argmax_indexed(self.values.len(), |i| self.values[i].im.abs()).0
    }

    /// Converts to a real field if every imaginary part is below
    /// `1e-12 * max |value|` (absolute `1e-300` floor for zero fields).
    pub fn into_real(self) -> Result<RealField> {
        let scale = self.max_abs();
        let im = self.max_imag();
        if im > 1e-12 * scale.max(1e-300) && im > 1e-300 {
            return Err(Error::Domain(format!(
                "field is not real: max imaginary part {im:.3e} vs magnitude {scale:.3e}"
            )));
        }
        Ok(self.re())
    }

    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(par::argmax_indexed(self.values.len(), |i| {
            (self.values[i] - other.values[i]).norm()
        })
        .0)
    }
}

/// Hermitian `(1,1)`-tensor `g_{ij̄}` sampled at every node, stored as its
/// real diagonal and (for n = 2) the complex entry `(1, 2̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianField {
    grid: GridSpec,
    diag: Vec<Vec<f64>>,
    off: Vec<C64>,
}

impl HermitianField {
    pub fn from_parts(grid: GridSpec, diag: Vec<Vec<f64>>, off: Vec<C64>) -> Result<Self> {
        let len = grid.len();
        let off_ok = if grid.n() == 1 {
            off.is_empty()
        } else {
            off.len() == len
        };
        if diag.len() != grid.n() || diag.iter().any(|d| d.len() != len) || !off_ok {
            return Err(Error::Domain("hermitian field has wrong shape".into()));
        }
        Ok(HermitianField { grid, diag, off })
    }

    /// Identity tensor `δ_{ij}`.
    pub fn identity(grid: GridSpec) -> Self {
        Self::from_fn(grid, |_| Herm::identity(grid.n()))
    }

    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(usize) -> Herm + Sync + Send,
    {
        let mats = par::map_indexed(grid.len(), f);
        Self::from_nodes(grid, &mats)
    }

    fn from_nodes(grid: GridSpec, mats: &[Herm]) -> Self {
        let n = grid.n();
        let mut diag = vec![mats.iter().map(|m| m.a).collect::<Vec<_>>()];
        let mut off = Vec::new();
        if n == 2 {
            diag.push(mats.iter().map(|m| m.b).collect());
            off = mats.iter().map(|m| m.c).collect();
        }
        HermitianField { grid, diag, off }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Matrix at one node.
    pub fn at(&self, node: usize) -> Herm {
        if self.grid.n() == 1 {
            Herm::scalar(self.diag[0][node])
        } else {
            Herm::two(self.diag[0][node], self.diag[1][node], self.off[node])
        }
    }

    /// Entry `(i, j̄)` as a complex field.
    pub fn entry(&self, i: usize, j: usize) -> ComplexField {
        let values = par::map_indexed(self.grid.len(), |k| self.at(k).get(i, j));
        ComplexField {
            grid: self.grid,
            values,
        }
    }

    pub fn diag(&self, i: usize) -> &[f64] {
        &self.diag[i]
    }

    pub fn off(&self) -> &[C64] {
        &self.off
    }

    /// Nodewise map.
    pub fn map<F>(&self, f: F) -> HermitianField
    where
        F: Fn(usize, Herm) -> Herm + Sync + Send,
    {
        Self::from_fn(self.grid, |k| f(k, self.at(k)))
    }

    pub fn add(&self, other: &HermitianField) -> Result<HermitianField> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self.map(|k, m| m.add(&other.at(k))))
    }

    /// Max over nodes of the Frobenius norm of the entrywise difference.
    pub fn max_abs_diff(&self, other: &HermitianField) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        let n = self.grid.n();
        Ok(par::argmax_indexed(self.grid.len(), |k| {
            let (a, b) = (self.at(k), other.at(k));
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += (a.get(i, j) - b.get(i, j)).norm_sqr();
                }
            }
            s.sqrt()
        })
        .0)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&self.map(|_, m| m.scale(0.0)))
            .unwrap_or(0.0)
    }

    /// Minimum eigenvalue over all nodes and the lowest node attaining it.
    pub fn min_eig(&self) -> (f64, usize) {
        par::argmin_indexed(self.grid.len(), |k| self.at(k).min_eig())
    }
}

pub(crate) fn same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Wirtinger derivative `∂f/∂z^axis = ½(∂_x − i∂_y) f`, computed spectrally.
pub fn d_dz(field: &ComplexField, axis: usize) -> Result<ComplexField> {
    field.grid.ensure_axis(axis)?;
    let s = Spectrum::of_complex(field);
    Ok(s.apply(|w| w.d_dz(axis)))
}

/// Conjugate Wirtinger derivative `∂f/∂z̄^axis = ½(∂_x + i∂_y) f`.
pub fn d_dzbar(field: &ComplexField, axis: usize) -> Result<ComplexField> {
    field.grid.ensure_axis(axis)?;
    let s = Spectrum::of_complex(field);
    Ok(s.apply(|w| w.d_dzbar(axis)))
}

/// Real directional derivative `Σ_a X^a ∂_a f` along a constant real vector
/// with components ordered `(x¹, y¹, x², y²)`.
pub fn directional(field: &ComplexField, dir: &[f64]) -> ComplexField {
    let d = field.grid.real_dim();
    let s = Spectrum::of_complex(field);
    s.apply(|w| {
        let mut k = 0.0;
        for a in 0..d {
            k += dir[a] * w.kd[a];
        }
        C64::new(0.0, k)
    })
}

/// Mixed Hessian `f_{ij̄}` of a real field.
pub fn ddbar(field: &RealField) -> HermitianField {
    Spectrum::of_real(field).ddbar()
}

/// Quadrature `Σ f·vol·h^{2n}` (trapezoid on the torus, spectrally exact for
/// band-limited integrands). `volume` must be strictly positive.
pub fn integrate(field: &RealField, volume: &RealField) -> Result<f64> {
    same_grid(&field.grid, &volume.grid)?;
    check_positive_volume(volume)?;
    let (f, v) = (&field.values, &volume.values);
    Ok(par::sum_indexed(f.len(), |i| f[i] * v[i]) * field.grid.cell_volume())
}

/// Complex-valued variant of [`integrate`].
pub fn integrate_complex(field: &ComplexField, volume: &RealField) -> Result<C64> {
    same_grid(&field.grid, &volume.grid)?;
    check_positive_volume(volume)?;
    let (f, v) = (&field.values, &volume.values);
    let re = par::sum_indexed(f.len(), |i| f[i].re * v[i]);
    let im = par::sum_indexed(f.len(), |i| f[i].im * v[i]);
    Ok(C64::new(re, im) * field.grid.cell_volume())
}

fn check_positive_volume(volume: &RealField) -> Result<()> {
    let (m, node) = volume.argmin();
    if !(m > 0.0) {
        return Err(Error::Domain(format!(
            "volume density must be positive, found {m:.3e} at node {node}"
        )));
    }
    Ok(())
}

/// Anti-aliasing guard for fields that enter nonlinear products.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AliasGuard {
    pub enabled: bool,
    /// Modes with `|k| > cutoff_fraction · N` on any axis count as aliasing risk.
    pub cutoff_fraction: f64,
    /// Allowed relative spectral content above the cutoff.
    pub tolerance: f64,
}

impl Default for AliasGuard {
    fn default() -> Self {
        AliasGuard {
            enabled: true,
            cutoff_fraction: 1.0 / 3.0,
            tolerance: 1e-10,
        }
    }
}

impl AliasGuard {
    pub fn disabled() -> Self {
        AliasGuard {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn cutoff(&self, grid: &GridSpec) -> usize {
        (self.cutoff_fraction * grid.samples() as f64).floor() as usize
    }

    /// Relative spectral magnitude above the cutoff.
    pub fn excess(&self, field: &RealField) -> f64 {
        let s = Spectrum::of_real(field);
        let cut = self.cutoff(&field.grid) as i64;
        let grid = field.grid;
        let c = s.coeffs();
        let total = par::argmax_indexed(c.len(), |i| c[i].norm()).0;
        if total <= 0.0 {
            return 0.0;
        }
        let high = par::argmax_indexed(c.len(), |i| {
            let ai = grid.axis_indices(i);
            let over = (0..grid.real_dim()).any(|a| grid.mode(ai[a]).abs() > cut);
            if over {
                c[i].norm()
            } else {
                0.0
            }
        })
        .0;
        high / total
    }

    pub fn check(&self, field: &RealField) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        let excess = self.excess(field);
        if excess > self.tolerance {
            return Err(Error::BandLimit {
                excess,
                cutoff: self.cutoff(&field.grid),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn g1(n: usize) -> GridSpec {
        GridSpec::standard(1, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::standard(3, 16).is_err());
        assert!(GridSpec::standard(1, 24).is_err());
        assert!(GridSpec::standard(1, 8).is_err());
        assert!(GridSpec::new(1, 16, -1.0).is_err());
        let g = GridSpec::standard(2, 16).unwrap();
        assert_eq!(g.len(), 65536);
        let idx = g.flat_index(&[3, 5, 7, 11]);
        assert_eq!(g.axis_indices(idx), [3, 5, 7, 11]);
    }

    #[test]
    fn d_dz_of_single_mode() {
        let g = g1(32);
        let f = ComplexField::from_fn(g, |x| C64::new(0.0, x[0]).exp());
        let df = d_dz(&f, 0).unwrap();
        let expect = ComplexField::from_fn(g, |x| C64::new(0.0, 0.5) * C64::new(0.0, x[0]).exp());
        assert!(df.max_abs_diff(&expect).unwrap() < 1e-12);
        let dbf = d_dzbar(&f, 0).unwrap();
        assert!(dbf.max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn derivatives_annihilate_constants() {
        let g = GridSpec::standard(2, 16).unwrap();
        let f = RealField::constant(g, 3.7).to_complex();
        for axis in 0..2 {
            assert!(d_dz(&f, axis).unwrap().max_abs() < 1e-13);
            assert!(d_dzbar(&f, axis).unwrap().max_abs() < 1e-13);
        }
        assert!(ddbar(&RealField::constant(g, 3.7)).max_abs() < 1e-13);
    }

    #[test]
    fn axis_out_of_range() {
        let f = RealField::zeros(g1(16)).to_complex();
        assert!(matches!(
            d_dz(&f, 1),
            Err(Error::AxisOutOfRange { axis: 1, n: 1 })
        ));
        assert!(d_dzbar(&f, 2).is_err());
    }

    #[test]
    fn mode_symbol_values() {
        // e^{i(x + y)}: ∂_z → (i/2)(1 − i), ∂_z̄ → (i/2)(1 + i)
        let g = g1(16);
        let f = ComplexField::from_fn(g, |x| C64::new(0.0, x[0] + x[1]).exp());
        let dz = d_dz(&f, 0).unwrap();
        let dzb = d_dzbar(&f, 0).unwrap();
        let cz = C64::new(0.0, 0.5) * C64::new(1.0, -1.0);
        let czb = C64::new(0.0, 0.5) * C64::new(1.0, 1.0);
        let ez = ComplexField::from_fn(g, |x| cz * C64::new(0.0, x[0] + x[1]).exp());
        let ezb = ComplexField::from_fn(g, |x| czb * C64::new(0.0, x[0] + x[1]).exp());
        assert!(dz.max_abs_diff(&ez).unwrap() < 1e-12);
        assert!(dzb.max_abs_diff(&ezb).unwrap() < 1e-12);
    }

    #[test]
    fn ddbar_of_cosine() {
        let g = g1(32);
        let f = RealField::from_fn(g, |x| x[0].cos());
        let h = ddbar(&f);
        let expect = RealField::from_fn(g, |x| -0.25 * x[0].cos());
        let diff = RealField::from_vec(g, h.diag(0).to_vec())
            .unwrap()
            .sub(&expect)
            .unwrap();
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let g = g1(32);
        let one = RealField::constant(g, 1.0);
        assert!((integrate(&one, &one).unwrap() - TAU * TAU).abs() < 1e-10);
        let s = RealField::from_fn(g, |x| x[0].sin());
        assert!(integrate(&s, &one).unwrap().abs() < 1e-12);
        let s2 = RealField::from_fn(g, |x| x[0].sin().powi(2));
        assert!((integrate(&s2, &one).unwrap() - 0.5 * TAU * TAU).abs() < 1e-10);
        let bad = RealField::from_fn(g, |x| x[0].cos());
        assert!(matches!(integrate(&one, &bad), Err(Error::Domain(_))));
    }

    #[test]
    fn alias_guard_rejects_high_modes() {
        let g = g1(32);
        let guard = AliasGuard::default();
        let low = RealField::from_fn(g, |x| (3.0 * x[0]).cos() + (10.0 * x[1]).sin());
        assert!(guard.check(&low).is_ok());
        let high = RealField::from_fn(g, |x| (12.0 * x[0]).cos());
        assert!(matches!(guard.check(&high), Err(Error::BandLimit { .. })));
        assert!(AliasGuard::disabled().check(&high).is_ok());
    }

    #[test]
    fn random_band_limited_respects_box() {
        let g = GridSpec::standard(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = RealField::random_band_limited(g, 3, 0.2, &mut rng);
        assert!((f.max_abs() - 0.2).abs() < 1e-14);
        let guard = AliasGuard {
            cutoff_fraction: 3.0 / 16.0,
            ..Default::default()
        };
        assert!(guard.excess(&f) < 1e-14);
    }

    #[test]
    fn complex_to_real_conversion() {
        let g = g1(16);
        let f = ComplexField::from_fn(g, |x| C64::new(x[0].cos(), 0.0));
        assert!(f.into_real().is_ok());
        let f = ComplexField::from_fn(g, |x| C64::new(x[0].cos(), 1e-3));
        assert!(f.into_real().is_err());
    }
}
