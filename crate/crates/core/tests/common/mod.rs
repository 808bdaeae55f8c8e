//! Analytic trigonometric sums used as FFT-free oracles.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsoliton::fields::HoloField;
use vsoliton::grid::{ComplexField, GridSpec, RealField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(n: usize, samples: usize) -> GridSpec {
    GridSpec::standard(n, samples).unwrap()
}

/// `f(x) = Σ Re(c e^{i k·x})` with integer wave vectors on the `2π` torus.
#[derive(Debug, Clone)]
pub struct TrigSum {
    pub dim: usize,
    pub terms: Vec<([f64; 4], C64)>,
}

impl TrigSum {
    pub fn random(
        n: usize,
        max_mode: i64,
        count: usize,
        amplitude: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let dim = 2 * n;
        let mut terms = Vec::new();
        for _ in 0..count {
            let mut k = [0.0; 4];
            for a in k.iter_mut().take(dim) {
                *a = rng.random_range(-max_mode..=max_mode) as f64;
            }
            let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            terms.push((k, c * amplitude / count as f64));
        }
        TrigSum { dim, terms }
    }

    pub fn single(dim: usize, k: [f64; 4], c: C64) -> Self {
        TrigSum {
            dim,
            terms: vec![(k, c)],
        }
    }

    /// Value of `op f` where `op` has polynomial symbol `sym(k)` acting on
    /// `e^{ik·x}`. Uses `Re(c e^{ikx}) = ½(c e^{ikx} + c̄ e^{−ikx})`.
    pub fn apply_at(&self, x: &[f64], sym: impl Fn(&[f64; 4]) -> C64) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let phase: f64 = (0..self.dim).map(|a| k[a] * x[a]).sum();
            let e = C64::from_polar(1.0, phase);
            let mk = k.map(|v| -v);
            s += 0.5 * (c * sym(k) * e + c.conj() * sym(&mk) * e.conj());
        }
        s
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.apply_at(x, |_| C64::new(1.0, 0.0)).re
    }

    pub fn sample(&self, grid: GridSpec) -> RealField {
        RealField::from_fn(grid, |x| self.value(x))
    }

    pub fn sample_op(
        &self,
        grid: GridSpec,
        sym: impl Fn(&[f64; 4]) -> C64 + Sync + Send,
    ) -> ComplexField {
        ComplexField::from_fn(grid, |x| self.apply_at(x, &sym))
    }

    /// `Σ |c| |k|^p`, a bound for every `p`-th order derivative.
    pub fn derivative_bound(&self, p: i32) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c.norm() * k.iter().map(|v| v * v).sum::<f64>().sqrt().powi(p))
            .sum()
    }
}

/// Symbol of `∂/∂z^i`, `½(∂_x − i∂_y)` on `e^{ik·x}`.
pub fn sym_dz(k: &[f64; 4], i: usize) -> C64 {
    C64::new(0.0, 0.5) * C64::new(k[2 * i], -k[2 * i + 1])
}

/// Symbol of `∂/∂z̄^i`, `½(∂_x + i∂_y)` on `e^{ik·x}`.
pub fn sym_dzbar(k: &[f64; 4], i: usize) -> C64 {
    C64::new(0.0, 0.5) * C64::new(k[2 * i], k[2 * i + 1])
}

pub fn random_z(n: usize, rng: &mut impl Rng) -> HoloField {
    HoloField::new(
        (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

/// Random smooth potential small enough that `δ + ∂∂̄φ` stays positive:
/// `|∂∂̄φ| ≤ Σ|c||k|²/4`, kept below one half.
pub fn random_potential(n: usize, rng: &mut impl Rng) -> TrigSum {
    let mut t = TrigSum::random(n, 2, 5, 1.0, rng);
    let bound = t.derivative_bound(2) / 4.0;
    let s = 0.4 * rng.random_range(0.2..1.0) / bound.max(1e-12);
    for (_, c) in t.terms.iter_mut() {
        *c *= s;
    }
    t
}

/// Random potential with `|∂∂̄φ| ≤ strength` and modes up to `max_mode`.
pub fn potential_with(n: usize, max_mode: i64, strength: f64, rng: &mut impl Rng) -> TrigSum {
    let mut t = TrigSum::random(n, max_mode, 5, 1.0, rng);
    let bound = t.derivative_bound(2) / 4.0;
    let s = strength / bound.max(1e-12);
    for (_, c) in t.terms.iter_mut() {
        *c *= s;
    }
    t
}

pub fn to_dense(m: &vsoliton::linalg::Herm) -> nalgebra::DMatrix<C64> {
    nalgebra::DMatrix::from_fn(m.n, m.n, |i, j| m.get(i, j))
}

/// `Z` with small integer components times a random real scale, together
/// with a `V`-invariant trigonometric sum: every wave vector `k` satisfies
/// `k·V = 0` exactly.
pub fn invariant_pair(n: usize, rng: &mut impl Rng) -> (HoloField, TrigSum) {
    let (re, im): (Vec<i64>, Vec<i64>) = loop {
        let re: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
        let im: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
        if re.iter().chain(&im).any(|&v| v != 0) {
            break (re, im);
        }
    };
    let scale = rng.random_range(0.3..1.5);
    let z = HoloField::new(
        (0..n)
            .map(|i| C64::new(re[i] as f64, im[i] as f64) * scale)
            .collect(),
    )
    .unwrap();
    // V ∝ (b¹, −a¹, b², −a²)
    let v: Vec<i64> = (0..n).flat_map(|i| [im[i], -re[i]]).collect();
    let mut terms = Vec::new();
    while terms.len() < 6 {
        let k: Vec<i64> = (0..2 * n).map(|_| rng.random_range(-3..=3)).collect();
        let dot: i64 = k.iter().zip(&v).map(|(a, b)| a * b).sum();
        if dot != 0 || k.iter().all(|&x| x == 0) {
            continue;
        }
        let mut kk = [0.0; 4];
        for (a, &x) in k.iter().enumerate() {
            kk[a] = x as f64;
        }
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        terms.push((kk, c * 0.2));
    }
    (z, TrigSum { dim: 2 * n, terms })
}
