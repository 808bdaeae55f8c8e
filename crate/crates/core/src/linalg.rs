//! Closed-form algebra for the 1×1 and 2×2 Hermitian matrices that live at
//! every grid node.

use num_complex::Complex64 as C64;

/// Hermitian matrix of size 1 or 2, stored as `[[a, c], [conj(c), b]]`.
/// For `n == 1` only `a` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: C64,
}

impl Herm {
    pub fn scalar(a: f64) -> Self {
        Herm {
            n: 1,
            a,
            b: 0.0,
            c: C64::new(0.0, 0.0),
        }
    }

    pub fn two(a: f64, b: f64, c: C64) -> Self {
        Herm { n: 2, a, b, c }
    }

    pub fn identity(n: usize) -> Self {
        match n {
            1 => Herm::scalar(1.0),
            _ => Herm::two(1.0, 1.0, C64::new(0.0, 0.0)),
        }
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        match (i, j) {
            (0, 0) => C64::new(self.a, 0.0),
            (1, 1) => C64::new(self.b, 0.0),
            (0, 1) => self.c,
            _ => self.c.conj(),
        }
    }

    pub fn trace(&self) -> f64 {
        if self.n == 1 {
            self.a
        } else {
            self.a + self.b
        }
    }

    pub fn det(&self) -> f64 {
        if self.n == 1 {
            self.a
        } else {
            self.a * self.b - self.c.norm_sqr()
        }
    }

    /// Eigenvalues in ascending order (second entry equals the first for n = 1).
    pub fn eigenvalues(&self) -> (f64, f64) {
        if self.n == 1 {
            return (self.a, self.a);
        }
        let mean = 0.5 * (self.a + self.b);
        let half = 0.5 * (self.a - self.b);
        let rad = (half * half + self.c.norm_sqr()).sqrt();
        (mean - rad, mean + rad)
    }

    pub fn min_eig(&self) -> f64 {
        self.eigenvalues().0
    }

    /// Matrix inverse. The caller guarantees non-singularity.
    pub fn inverse(&self) -> Herm {
        if self.n == 1 {
            return Herm::scalar(1.0 / self.a);
        }
        let d = self.det();
        Herm::two(self.b / d, self.a / d, -self.c / d)
    }

    /// Entrywise complex conjugate (equivalently, the transpose).
    pub fn conj(&self) -> Herm {
        Herm {
            c: self.c.conj(),
            ..*self
        }
    }

    pub fn scale(&self, s: f64) -> Herm {
        Herm {
            n: self.n,
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
        }
    }

    pub fn add(&self, o: &Herm) -> Herm {
        Herm {
            n: self.n,
            a: self.a + o.a,
            b: self.b + o.b,
            c: self.c + o.c,
        }
    }

    /// Rank-one matrix `v v^*`.
    pub fn outer(v: &[C64]) -> Herm {
        if v.len() == 1 {
            Herm::scalar(v[0].norm_sqr())
        } else {
            Herm::two(v[0].norm_sqr(), v[1].norm_sqr(), v[0] * v[1].conj())
        }
    }

    /// `Σ_ij M_ij X_ij` where `X` is another Hermitian matrix; always real.
    pub fn contract(&self, x: &Herm) -> f64 {
        if self.n == 1 {
            self.a * x.a
        } else {
            self.a * x.a + self.b * x.b + 2.0 * (self.c * x.c).re
        }
    }

    /// `v^T M conj(v)` = `Σ_ij M_ij v_i conj(v_j)`; real.
    pub fn quad(&self, v: &[C64]) -> f64 {
        if self.n == 1 {
            self.a * v[0].norm_sqr()
        } else {
            self.a * v[0].norm_sqr()
                + self.b * v[1].norm_sqr()
                + 2.0 * (self.c * v[0] * v[1].conj()).re
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_forms() {
        let m = Herm::two(2.0, 3.0, C64::new(0.5, -1.0));
        let (l0, l1) = m.eigenvalues();
        assert!((l0 + l1 - m.trace()).abs() < 1e-14);
        assert!((l0 * l1 - m.det()).abs() < 1e-13);
        let inv = m.inverse();
        // M * M^{-1} = I, checked entrywise
        for i in 0..2 {
            for j in 0..2 {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..2 {
                    s += m.get(i, k) * inv.get(k, j);
                }
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn quad_matches_outer_contraction() {
        let m = Herm::two(1.5, 0.7, C64::new(0.1, 0.2));
        let v = [C64::new(0.3, -1.0), C64::new(2.0, 0.5)];
        let direct = m.quad(&v);
        let via = m.contract(&Herm::outer(&v));
        assert!((direct - via).abs() < 1e-13);
    }
}
