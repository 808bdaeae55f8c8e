//! Fourier-side representation of grid fields and the derivative symbols.

use num_complex::Complex64 as C64;

use super::{fft, ComplexField, GridSpec, HermitianField, RealField};
use crate::par;

const I2: C64 = C64::new(0.0, 0.5);

/// Wavenumbers of one spectral index.
///
/// `kd` is the first-derivative wavenumber with the Nyquist mode dropped (its
/// odd derivative is not representable as a real field); `k` keeps the
/// Nyquist mode and feeds second-order diagonal symbols, so `∂∂̄` has only the
/// constants as kernel.
#[derive(Debug, Clone, Copy)]
pub struct Wave {
    pub kd: [f64; 4],
    pub k: [f64; 4],
    n: usize,
}

impl Wave {
    pub fn new(grid: &GridSpec, idx: usize) -> Wave {
        let ai = grid.axis_indices(idx);
        let base = grid.base_wavenumber();
        let half = (grid.samples() / 2) as i64;
        let mut kd = [0.0; 4];
        let mut k = [0.0; 4];
        for a in 0..grid.real_dim() {
            let m = grid.mode(ai[a]);
            k[a] = m as f64 * base;
            kd[a] = if m == half { 0.0 } else { k[a] };
        }
        Wave { kd, k, n: grid.n() }
    }

    /// `κ = k_x − i k_y` for complex axis `axis`; `∂_z` has symbol `(i/2)κ`.
    pub fn kappa(&self, axis: usize) -> C64 {
        C64::new(self.kd[2 * axis], -self.kd[2 * axis + 1])
    }

    pub fn d_dz(&self, axis: usize) -> C64 {
        I2 * self.kappa(axis)
    }

    pub fn d_dzbar(&self, axis: usize) -> C64 {
        I2 * self.kappa(axis).conj()
    }

    /// Symbol of `∂_i ∂_j̄`.
    pub fn ddbar(&self, i: usize, j: usize) -> C64 {
        if i == j {
            let (x, y) = (self.k[2 * i], self.k[2 * i + 1]);
            C64::new(-0.25 * (x * x + y * y), 0.0)
        } else {
            -0.25 * self.kappa(i) * self.kappa(j).conj()
        }
    }

    /// Symbol of the flat Laplacian `Σ_i ∂_i ∂_ī`.
    pub fn flat_laplacian(&self) -> f64 {
        (0..self.n).map(|i| self.ddbar(i, i).re).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.k.iter().all(|&x| x == 0.0)
    }
}

/// Per-axis wavenumbers, shared by every axis, for fast [`Wave`] lookup.
struct WaveTable {
    grid: GridSpec,
    k: Vec<f64>,
    kd: Vec<f64>,
}

impl WaveTable {
    fn new(grid: &GridSpec) -> WaveTable {
        let w: Vec<Wave> = (0..grid.samples()).map(|i| Wave::new(grid, i)).collect();
        // index i on the last axis alone
        let last = grid.real_dim() - 1;
        WaveTable {
            grid: *grid,
            k: w.iter().map(|w| w.k[last]).collect(),
            kd: w.iter().map(|w| w.kd[last]).collect(),
        }
    }

    fn wave(&self, idx: usize) -> Wave {
        let ai = self.grid.axis_indices(idx);
        let mut w = Wave {
            kd: [0.0; 4],
            k: [0.0; 4],
            n: self.grid.n(),
        };
        for a in 0..self.grid.real_dim() {
            w.k[a] = self.k[ai[a]];
            w.kd[a] = self.kd[ai[a]];
        }
        w
    }
}

/// Unnormalized discrete Fourier coefficients of a grid field.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: GridSpec,
    coeffs: Vec<C64>,
}

impl Spectrum {
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<C64>) -> Spectrum {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count mismatch");
        Spectrum { grid, coeffs }
    }

    pub fn of_complex(f: &ComplexField) -> Spectrum {
        let mut c = f.values.clone();
        fft::forward(&mut c, f.grid.samples(), f.grid.real_dim());
        Spectrum {
            grid: f.grid,
            coeffs: c,
        }
    }

    pub fn of_real(f: &RealField) -> Spectrum {
        Self::of_real_slice(f.grid, &f.values)
    }

    pub(crate) fn of_real_slice(grid: GridSpec, v: &[f64]) -> Spectrum {
        let mut c = par::map_indexed(v.len(), |i| C64::new(v[i], 0.0));
        fft::forward(&mut c, grid.samples(), grid.real_dim());
        Spectrum { grid, coeffs: c }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn inverse(&self) -> ComplexField {
        let mut v = self.coeffs.clone();
        fft::inverse(&mut v, self.grid.samples(), self.grid.real_dim());
        ComplexField {
            grid: self.grid,
            values: v,
        }
    }

    /// Real part of the inverse transform.
    pub fn inverse_re(&self) -> Vec<f64> {
        let mut v = self.coeffs.clone();
        fft::inverse(&mut v, self.grid.samples(), self.grid.real_dim());
        par::map_indexed(v.len(), |i| v[i].re)
    }

    /// Multiplies every coefficient by `sym(wave)` in place.
    pub fn multiply<F>(&mut self, sym: F)
    where
        F: Fn(&Wave) -> C64 + Sync + Send,
    {
        let table = WaveTable::new(&self.grid);
        par::for_each_mut(&mut self.coeffs, |i, c| *c *= sym(&table.wave(i)));
    }

    /// Inverse transform after multiplying by `sym(wave)`.
    pub fn apply<F>(&self, sym: F) -> ComplexField
    where
        F: Fn(&Wave) -> C64 + Sync + Send,
    {
        ComplexField {
            grid: self.grid,
            values: self.apply_raw(sym),
        }
    }

    pub(crate) fn apply_raw<F>(&self, sym: F) -> Vec<C64>
    where
        F: Fn(&Wave) -> C64 + Sync + Send,
    {
        let grid = self.grid;
        let table = WaveTable::new(&grid);
        let c = &self.coeffs;
        let mut v = par::map_indexed(c.len(), |i| c[i] * sym(&table.wave(i)));
        fft::inverse(&mut v, grid.samples(), grid.real_dim());
        v
    }

    /// Two real fields from one inverse transform. Both symbols must map real
    /// fields to real fields (`σ(−k) = conj σ(k)`), which holds for every
    /// even-order derivative symbol used here.
    pub fn apply_real_pair<F, G>(&self, s1: F, s2: G) -> (Vec<f64>, Vec<f64>)
    where
        F: Fn(&Wave) -> C64 + Sync + Send,
        G: Fn(&Wave) -> C64 + Sync + Send,
    {
        let v = self.apply_raw(|w| s1(w) + C64::new(0.0, 1.0) * s2(w));
        let a = par::map_indexed(v.len(), |i| v[i].re);
        let b = par::map_indexed(v.len(), |i| v[i].im);
        (a, b)
    }

    /// Mixed Hessian `f_{ij̄}` of the real field with this spectrum.
    pub fn ddbar(&self) -> HermitianField {
        let grid = self.grid;
        if grid.n() == 1 {
            let v = self.apply_raw(|w| w.ddbar(0, 0));
            let d = par::map_indexed(v.len(), |i| v[i].re);
            HermitianField {
                grid,
                diag: vec![d],
                off: Vec::new(),
            }
        } else {
            let (d1, d2) = self.apply_real_pair(|w| w.ddbar(0, 0), |w| w.ddbar(1, 1));
            let off = self.apply_raw(|w| w.ddbar(0, 1));
            HermitianField {
                grid,
                diag: vec![d1, d2],
                off,
            }
        }
    }
}
