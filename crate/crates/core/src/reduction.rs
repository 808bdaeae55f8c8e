//! Flat `ℂ²` with the diagonal circle action `e^{iθ}(z¹, z²)`.
//!
//! Real coordinates are `(x¹, y¹, x², y²)`, `ω = Σ dxᵏ ∧ dyᵏ`, `J∂_x = ∂_y`.
//! The generator is `V = Σ(−y∂_x + x∂_y)`, i.e. `V(z) = iz` as a vector in
//! `ℂ²`, so `JV(z) = −z`. The moment map follows the convention
//! `i_V ω = −dμ`, which gives `μ = ½|z|²`; in the `√−1`-convention of the
//! complexified statement `i_V ω = √−1 dμ` the same `μ` appears up to the
//! constant factor `−√−1`. Along `U = JV/|V|²` one has `dμ(U) = −1`, so the
//! transport constant is [`TRANSPORT_RATE`].

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};

/// Inner radius squared of the working annulus.
pub const ANNULUS_MIN: f64 = 1e-6;

/// `d/dt μ(φ_t(p))` along the flow of `U = JV/|V|²`.
pub const TRANSPORT_RATE: f64 = -1.0;

/// Point of the local model, away from the fixed point of the action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalModelPoint {
    z: [C64; 2],
}

fn norm_sq(z: &[C64; 2]) -> f64 {
    z[0].norm_sqr() + z[1].norm_sqr()
}

/// Real inner product `Re Σ a_k conj(b_k)`, the flat metric.
pub fn metric(a: &[C64; 2], b: &[C64; 2]) -> f64 {
    (a[0] * b[0].conj() + a[1] * b[1].conj()).re
}

/// Flat symplectic form `ω(a, b) = g(Ja, b)`.
pub fn omega(a: &[C64; 2], b: &[C64; 2]) -> f64 {
    let i = C64::new(0.0, 1.0);
    metric(&[i * a[0], i * a[1]], b)
}

impl LocalModelPoint {
    pub fn new(z1: C64, z2: C64) -> Result<Self> {
        let z = [z1, z2];
        let r2 = norm_sq(&z);
        if !(r2 >= ANNULUS_MIN) || !r2.is_finite() {
            return Err(Error::Domain(format!(
                "|z|² = {r2:.3e} is outside the annulus |z|² >= {ANNULUS_MIN:e}"
            )));
        }
        Ok(LocalModelPoint { z })
    }

    pub fn z(&self) -> [C64; 2] {
        self.z
    }

    pub fn moment(&self) -> f64 {
        moment_map(self)
    }

    /// Circle action `e^{iθ}·p`.
    pub fn rotate(&self, theta: f64) -> LocalModelPoint {
        let e = C64::from_polar(1.0, theta);
        LocalModelPoint {
            z: [e * self.z[0], e * self.z[1]],
        }
    }

    /// Generator `V` at this point.
    pub fn v(&self) -> [C64; 2] {
        let i = C64::new(0.0, 1.0);
        [i * self.z[0], i * self.z[1]]
    }

    /// `JV` at this point.
    pub fn jv(&self) -> [C64; 2] {
        [-self.z[0], -self.z[1]]
    }
}

/// `μ = ½(|z¹|² + |z²|²)`.
pub fn moment_map(p: &LocalModelPoint) -> f64 {
    0.5 * norm_sq(&p.z)
}

/// Linear vector field `W(z) = A z` on `ℂ²` with an exactly known flow.
#[derive(Debug, Clone, Copy)]
enum TestFlow {
    /// `W = JV`, flow `e^{−t} z`.
    Radial,
    /// `W = (z², z¹)`, flow by `cosh t`, `sinh t`.
    Boost,
    /// `W = (z¹, −2z²)`, flow `(e^t z¹, e^{−2t} z²)`.
    Anisotropic,
}

impl TestFlow {
    const ALL: [TestFlow; 3] = [TestFlow::Radial, TestFlow::Boost, TestFlow::Anisotropic];

    fn generator(self, z: &[C64; 2]) -> [C64; 2] {
        match self {
            TestFlow::Radial => [-z[0], -z[1]],
            TestFlow::Boost => [z[1], z[0]],
            TestFlow::Anisotropic => [z[0], -2.0 * z[1]],
        }
    }

    fn flow(self, z: &[C64; 2], t: f64) -> [C64; 2] {
        match self {
            TestFlow::Radial => {
                let e = (-t).exp();
                [z[0] * e, z[1] * e]
            }
            TestFlow::Boost => {
                let (c, s) = (t.cosh(), t.sinh());
                [c * z[0] + s * z[1], s * z[0] + c * z[1]]
            }
            TestFlow::Anisotropic => [z[0] * t.exp(), z[1] * (-2.0 * t).exp()],
        }
    }
}

/// Max over test directions `W` of `|D_h μ(W) + s·ω(V, W)|`, where `D_h` is
/// the central difference of `s·μ` along the exact flow of `W` and the field
/// is `s·V`. With `s = 1` this checks `i_V ω = −dμ`.
pub fn check_hamiltonian_scaled(p: &LocalModelPoint, h: f64, s: f64) -> Result<f64> {
    if !(1e-6..=1e-2).contains(&h) {
        return Err(Error::Domain(format!("step {h:e} outside [1e-6, 1e-2]")));
    }
    let mu = |z: &[C64; 2]| s * 0.5 * norm_sq(z);
    let sv = p.v().map(|c| c * s);
    let mut worst: f64 = 0.0;
    for f in TestFlow::ALL {
        let fd = (mu(&f.flow(&p.z, h)) - mu(&f.flow(&p.z, -h))) / (2.0 * h);
        let contraction = omega(&sv, &f.generator(&p.z));
        worst = worst.max((fd + contraction).abs());
    }
    Ok(worst)
}

pub fn check_hamiltonian(p: &LocalModelPoint, h: f64) -> Result<f64> {
    check_hamiltonian_scaled(p, h, 1.0)
}

/// `U = JV/|V|² = −z/|z|²`.
fn u_field(z: &[C64; 2]) -> [C64; 2] {
    let r2 = norm_sq(z);
    [-z[0] / r2, -z[1] / r2]
}

fn rk4_step(z: &[C64; 2], dt: f64) -> Option<[C64; 2]> {
    let add = |a: &[C64; 2], b: &[C64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let inside = |z: &[C64; 2]| norm_sq(z) >= ANNULUS_MIN;
    let k1 = u_field(z);
    let z2 = add(z, &k1, 0.5 * dt);
    if !inside(&z2) {
        return None;
    }
    let k2 = u_field(&z2);
    let z3 = add(z, &k2, 0.5 * dt);
    if !inside(&z3) {
        return None;
    }
    let k3 = u_field(&z3);
    let z4 = add(z, &k3, dt);
    if !inside(&z4) {
        return None;
    }
    let k4 = u_field(&z4);
    let out = [
        z[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (dt / 6.0),
        z[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (dt / 6.0),
    ];
    inside(&out).then_some(out)
}

fn integrate_fixed(p: &LocalModelPoint, t: f64, dt: f64) -> Result<[C64; 2]> {
    let steps = (t.abs() / dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut z = p.z;
    for s in 0..steps {
        z = rk4_step(&z, h).ok_or(Error::Trajectory {
            exit_time: (s as f64 + 0.5) * h,
        })?;
    }
    Ok(z)
}

/// Transport along `U` for time `t`, by RK4 with the step halved until two
/// successive results agree to `1e-12` (at most 20 halvings).
pub fn flow_u(p: &LocalModelPoint, t: f64, dt: f64) -> Result<LocalModelPoint> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {dt}")));
    }
    if t == 0.0 {
        return Ok(*p);
    }
    let mut h = dt.min(t.abs());
    let mut prev = integrate_fixed(p, t, h)?;
    for _ in 0..20 {
        h *= 0.5;
        let next = integrate_fixed(p, t, h)?;
        let diff = ((next[0] - prev[0]).norm_sqr() + (next[1] - prev[1]).norm_sqr()).sqrt();
        prev = next;
        if diff <= 1e-12 {
            break;
        }
    }
    Ok(LocalModelPoint { z: prev })
}

/// `|μ(φ_t p) − μ(p) − c·t|` with `c` = [`TRANSPORT_RATE`].
pub fn transport_residual(p: &LocalModelPoint, t: f64, dt: f64) -> Result<f64> {
    let q = flow_u(p, t, dt)?;
    Ok((q.moment() - p.moment() - TRANSPORT_RATE * t).abs())
}

/// Orthogonal projection onto the horizontal space `Q`, the complex line
/// orthogonal to `z`, which is the `g`- and `ω`-complement of `span{V, JV}`
/// inside the tangent space.
pub fn horizontal_projection(p: &LocalModelPoint, y: &[C64; 2]) -> [C64; 2] {
    let z = p.z;
    let ip = y[0] * z[0].conj() + y[1] * z[1].conj();
    let s = ip / norm_sq(&z);
    [y[0] - s * z[0], y[1] - s * z[1]]
}

/// Affine chart `w = z²/z¹` of the quotient.
pub fn chart(p: &LocalModelPoint) -> C64 {
    p.z[1] / p.z[0]
}

/// Differential of the chart, `dw(Y) = (Y² z¹ − z² Y¹)/(z¹)²`.
pub fn chart_differential(p: &LocalModelPoint, y: &[C64; 2]) -> C64 {
    let z = p.z;
    (y[1] * z[0] - z[1] * y[0]) / (z[0] * z[0])
}

/// Fubini–Study metric on the chart, `2 Re(ξ η̄)/(1 + |w|²)²`.
pub fn fubini_study(w: C64, xi: C64, eta: C64) -> f64 {
    2.0 * (xi * eta.conj()).re / (1.0 + w.norm_sqr()).powi(2)
}

/// Fubini–Study form `g_FS(iξ, η)`.
pub fn fubini_study_form(w: C64, xi: C64, eta: C64) -> f64 {
    fubini_study(w, C64::new(0.0, 1.0) * xi, eta)
}

/// Summary of a reduced-metric sampling run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ReducedMetricReport {
    /// Max relative mismatch of `g(U, W)` and `ω(U, W)` against `τ·FS`.
    pub max_residual: f64,
    /// Max of the idempotence and `span{V, JV}`-orthogonality residuals.
    pub max_projection_residual: f64,
    /// Smallest Gram determinant of the pushed horizontal frame in `τ·FS`.
    pub min_gram_det: f64,
    /// Samples redrawn because `z¹` was too close to the excluded chart locus.
    pub resampled: usize,
    pub samples: usize,
}

fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    // Box–Muller
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    C64::from_polar(r, std::f64::consts::TAU * u2)
}

/// Uniform point on the level set `μ = τ` with `|z¹|² ≥ τ/50`; returns the
/// point and the number of rejected draws.
pub fn sample_level<R: Rng + ?Sized>(tau: f64, rng: &mut R) -> Result<(LocalModelPoint, usize)> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("level must be positive, got {tau}")));
    }
    let mut rejected = 0;
    loop {
        let v = [gaussian_c(rng), gaussian_c(rng)];
        let s = (2.0 * tau / norm_sq(&v)).sqrt();
        let z = [v[0] * s, v[1] * s];
        if z[0].norm_sqr() < tau / 50.0 {
            rejected += 1;
            continue;
        }
        return Ok((LocalModelPoint::new(z[0], z[1])?, rejected));
    }
}

/// Residuals of `g(U, W) = τ·g_FS(dw U, dw W)` and the matching statement for
/// `ω` at one point, for one pair of horizontal vectors.
pub fn reduced_pair_residual(p: &LocalModelPoint, tau: f64, u: &[C64; 2], w: &[C64; 2]) -> f64 {
    let wp = chart(p);
    let (du, dw) = (chart_differential(p, u), chart_differential(p, w));
    let scale = (metric(u, u) * metric(w, w)).sqrt().max(1e-300);
    let rg = (metric(u, w) - tau * fubini_study(wp, du, dw)).abs();
    let ro = (omega(u, w) - tau * fubini_study_form(wp, du, dw)).abs();
    rg.max(ro) / scale
}

/// Samples `samples` points of `μ⁻¹(τ)` with random horizontal pairs.
pub fn reduced_metric_check<R: Rng + ?Sized>(
    tau: f64,
    samples: usize,
    rng: &mut R,
) -> Result<ReducedMetricReport> {
    let mut rep = ReducedMetricReport {
        max_residual: 0.0,
        max_projection_residual: 0.0,
        min_gram_det: f64::INFINITY,
        resampled: 0,
        samples,
    };
    for _ in 0..samples {
        let (p, rejected) = sample_level(tau, rng)?;
        rep.resampled += rejected;
        let raw_u = [gaussian_c(rng), gaussian_c(rng)];
        let raw_w = [gaussian_c(rng), gaussian_c(rng)];
        let u = horizontal_projection(&p, &raw_u);
        let w = horizontal_projection(&p, &raw_w);
        // idempotence and orthogonality to the orbit directions
        let uu = horizontal_projection(&p, &u);
        let scale = metric(&u, &u).sqrt().max(1e-300);
        let idem = ((uu[0] - u[0]).norm() + (uu[1] - u[1]).norm()) / scale;
        let (v, jv) = (p.v(), p.jv());
        let orth = [
            omega(&v, &u).abs(),
            omega(&jv, &u).abs(),
            metric(&v, &u).abs(),
            metric(&jv, &u).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
            / (scale * metric(&v, &v).sqrt());
        rep.max_projection_residual = rep.max_projection_residual.max(idem).max(orth);
        rep.max_residual = rep
            .max_residual
            .max(reduced_pair_residual(&p, tau, &u, &w))
            .max(reduced_pair_residual(&p, tau, &u, &u));
        // frame {q, iq} of Q with q = (−conj z², conj z¹)
        let z = p.z();
        let q = [-z[1].conj(), z[0].conj()];
        let iq = [C64::new(0.0, 1.0) * q[0], C64::new(0.0, 1.0) * q[1]];
        let wp = chart(&p);
        let (a, b) = (chart_differential(&p, &q), chart_differential(&p, &iq));
        let gram = tau
            * tau
            * (fubini_study(wp, a, a) * fubini_study(wp, b, b) - fubini_study(wp, a, b).powi(2));
        rep.min_gram_det = rep.min_gram_det.min(gram);
    }
    Ok(rep)
}

/// Max relative deviation from `g_{τ₂} = (τ₂/τ₁) g_{τ₁}` at corresponding
/// chart points, using the radial rescaling between the two levels.
pub fn level_scaling_residual<R: Rng + ?Sized>(
    tau1: f64,
    tau2: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let s = (tau2 / tau1).sqrt();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (p1, _) = sample_level(tau1, rng)?;
        let z = p1.z();
        let p2 = LocalModelPoint::new(z[0] * s, z[1] * s)?;
        let raw = [gaussian_c(rng), gaussian_c(rng)];
        let u1 = horizontal_projection(&p1, &raw);
        let u2 = [u1[0] * s, u1[1] * s];
        let (w1, w2) = (chart(&p1), chart(&p2));
        let g1 = tau1
            * fubini_study(
                w1,
                chart_differential(&p1, &u1),
                chart_differential(&p1, &u1),
            );
        let g2 = tau2
            * fubini_study(
                w2,
                chart_differential(&p2, &u2),
                chart_differential(&p2, &u2),
            );
        worst = worst.max((g2 / g1 - tau2 / tau1).abs() / (tau2 / tau1));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_values() {
        let p = LocalModelPoint::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert_eq!(moment_map(&p), 0.5);
        let q = LocalModelPoint::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap();
        assert_eq!(moment_map(&q), 1.0);
        assert!(LocalModelPoint::new(C64::new(1e-4, 0.0), C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn flow_at_zero_time_is_identity() {
        let p = LocalModelPoint::new(C64::new(0.3, 0.2), C64::new(-0.5, 0.1)).unwrap();
        assert_eq!(flow_u(&p, 0.0, 0.01).unwrap(), p);
    }

    #[test]
    fn flow_exits_annulus() {
        // |z|² decreases at rate 2 along U
        let p = LocalModelPoint::new(C64::new(0.5, 0.0), C64::new(0.0, 0.0)).unwrap();
        match flow_u(&p, 0.2, 0.01) {
            Err(Error::Trajectory { exit_time }) => assert!(exit_time > 0.1 && exit_time <= 0.2),
            other => panic!("expected trajectory error, got {other:?}"),
        }
    }

    #[test]
    fn fubini_study_at_origin() {
        let p = LocalModelPoint::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let u = [C64::new(0.0, 0.0), C64::new(0.7, -0.2)];
        let w = [C64::new(0.0, 0.0), C64::new(-0.1, 0.4)];
        assert!(reduced_pair_residual(&p, 0.5, &u, &w) < 1e-15);
    }
}
