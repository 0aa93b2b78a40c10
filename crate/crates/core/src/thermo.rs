//! Gas law p(v) = v^(-γ), Riemann invariants, relative functions,
//! the viscosity split and the Euler/Lagrange change of variables.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Polytropic gas with viscosity μ(v) = 1 + v^(-α).
///
/// `v_star` is the reference volume used by the viscosity cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasLaw {
    pub gamma: f64,
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_star: f64,
}

impl Default for GasLaw {
    fn default() -> Self {
        GasLaw::new(2.0, 1.0).expect("default gas is valid")
    }
}

impl GasLaw {
    pub fn new(gamma: f64, alpha: f64) -> Result<GasLaw> {
        let law = GasLaw { gamma, alpha, c1: 0.5, c2: 2.0, v_star: 1.0 };
        law.validate()?;
        Ok(law)
    }

    /// The secondary test gas, γ = 1.4.
    pub fn air() -> GasLaw {
        GasLaw::new(1.4, 0.4).expect("valid")
    }

    pub fn with_v_star(mut self, v_star: f64) -> Result<GasLaw> {
        if !(v_star > 0.0) {
            return Err(Error::Domain(format!("v_star must be positive, got {v_star}")));
        }
        self.v_star = v_star;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.gamma;
        if !(g > 1.0) {
            return Err(Error::Config(format!("gamma must exceed 1, got {g}")));
        }
        if self.alpha < g - 1.0 - 1e-12 || self.alpha > g + 1e-12 {
            return Err(Error::Config(format!(
                "alpha must lie in [gamma-1, gamma], got {} for gamma {g}",
                self.alpha
            )));
        }
        if g <= 5.0 / 3.0 && (self.alpha - (g - 1.0)).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "for gamma <= 5/3 alpha must equal gamma-1, got {}",
                self.alpha
            )));
        }
        if !(self.c1 > 0.0 && self.c2 > self.c1) {
            return Err(Error::Config("need 0 < c1 < c2".into()));
        }
        if !(self.v_star > 0.0) {
            return Err(Error::Config("v_star must be positive".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn p(&self, v: f64) -> f64 {
        v.powf(-self.gamma)
    }

    /// p'(v) = -γ v^(-γ-1)
    #[inline]
    pub fn dp(&self, v: f64) -> f64 {
        -self.gamma * v.powf(-self.gamma - 1.0)
    }

    #[inline]
    pub fn q(&self, v: f64) -> f64 {
        v.powf(1.0 - self.gamma) / (self.gamma - 1.0)
    }

    #[inline]
    pub fn rel_p(&self, v: f64, w: f64) -> f64 {
        self.p(v) - self.p(w) - self.dp(w) * (v - w)
    }

    #[inline]
    pub fn rel_q(&self, v: f64, w: f64) -> f64 {
        self.q(v) - self.q(w) + self.p(w) * (v - w)
    }

    /// Coefficient 2√γ/(γ-1) of z(v).
    #[inline]
    pub fn z_coef(&self) -> f64 {
        2.0 * self.gamma.sqrt() / (self.gamma - 1.0)
    }

    #[inline]
    pub fn z(&self, v: f64) -> f64 {
        self.z_coef() * v.powf(-(self.gamma - 1.0) / 2.0)
    }

    #[inline]
    pub fn v_of_z(&self, z: f64) -> f64 {
        (z / self.z_coef()).powf(-2.0 / (self.gamma - 1.0))
    }

    /// Sound speed √(-p'(v)) in mass coordinates.
    #[inline]
    pub fn c(&self, v: f64) -> f64 {
        self.gamma.sqrt() * v.powf(-(self.gamma + 1.0) / 2.0)
    }

    /// Base viscosity μ(v) = 1 + v^(-α) entering μ(v) v^γ p(v)_x.
    #[inline]
    pub fn mu(&self, v: f64) -> f64 {
        1.0 + v.powf(-self.alpha)
    }

    /// Lagrangian viscosity in the momentum equation, γ μ(v).
    #[inline]
    pub fn mu_bar_l(&self, v: f64) -> f64 {
        self.gamma * self.mu(v)
    }

    /// Cutoff: 0 below 2v*, 1 above 3v*, linear in between.
    #[inline]
    pub fn cutoff(&self, v: f64) -> f64 {
        ((v - 2.0 * self.v_star) / self.v_star).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangianState {
    pub v: f64,
    pub h: f64,
}

impl LagrangianState {
    pub fn new(v: f64, h: f64) -> Result<LagrangianState> {
        if !(v > 0.0) || !v.is_finite() || !h.is_finite() {
            return Err(Error::Vacuum(format!("state ({v}, {h}) has non-positive or non-finite volume")));
        }
        Ok(LagrangianState { v, h })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannCoords {
    pub r: f64,
    pub s: f64,
}

impl RiemannCoords {
    #[inline]
    pub fn z(&self) -> f64 {
        0.5 * (self.s - self.r)
    }
    #[inline]
    pub fn h(&self) -> f64 {
        0.5 * (self.s + self.r)
    }
    #[inline]
    pub fn from_zh(z: f64, h: f64) -> RiemannCoords {
        RiemannCoords { r: h - z, s: h + z }
    }
    /// max(|Δr|, |Δs|)
    pub fn dist(&self, o: &RiemannCoords) -> f64 {
        (self.r - o.r).abs().max((self.s - o.s).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerianState {
    pub rho: f64,
    pub u: f64,
}

fn check_v(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("specific volume must be positive, got {v}")))
    }
}

pub fn pressure(v: f64, law: &GasLaw) -> Result<f64> {
    check_v(v)?;
    Ok(law.p(v))
}

pub fn rel_pressure(v: f64, w: f64, law: &GasLaw) -> Result<f64> {
    check_v(v)?;
    check_v(w)?;
    Ok(law.rel_p(v, w))
}

pub fn q_energy(v: f64, law: &GasLaw) -> Result<f64> {
    check_v(v)?;
    Ok(law.q(v))
}

pub fn rel_q(v: f64, w: f64, law: &GasLaw) -> Result<f64> {
    check_v(v)?;
    check_v(w)?;
    Ok(law.rel_q(v, w))
}

pub fn to_riemann(u: LagrangianState, law: &GasLaw) -> Result<RiemannCoords> {
    check_v(u.v)?;
    Ok(RiemannCoords::from_zh(law.z(u.v), u.h))
}

pub fn from_riemann(rc: RiemannCoords, law: &GasLaw) -> Result<LagrangianState> {
    let z = rc.z();
    if !(z > 0.0) {
        return Err(Error::Vacuum(format!("s <= r: ({}, {})", rc.r, rc.s)));
    }
    Ok(LagrangianState { v: law.v_of_z(z), h: rc.h() })
}

pub fn char_speeds(v: f64, law: &GasLaw) -> Result<(f64, f64)> {
    check_v(v)?;
    let c = law.c(v);
    Ok((-c, c))
}

/// (μ, μ1, μ2) with μ2 = (μ - C1 v^(-α))·cutoff(v), C1 = 1.
pub fn viscosity(v: f64, law: &GasLaw) -> Result<(f64, f64, f64)> {
    check_v(v)?;
    let mu = law.mu(v);
    let mu2 = (mu - v.powf(-law.alpha)) * law.cutoff(v);
    Ok((mu, mu - mu2, mu2))
}

/// Smallest Q(v|w)/|v-w|² over a grid of 0 < v ≤ 3v*, 0 < w < 2v*.
pub fn fit_q_lower_constant(law: &GasLaw, v_min: f64, n: usize) -> f64 {
    let mut best = f64::INFINITY;
    let vs = law.v_star;
    for i in 0..n {
        let v = v_min + (3.0 * vs - v_min) * i as f64 / (n - 1) as f64;
        for k in 0..n {
            let w = v_min + (2.0 * vs - v_min) * (k as f64 + 0.5) / n as f64;
            let d = v - w;
            if d.abs() < 1e-9 {
                continue;
            }
            best = best.min(law.rel_q(v, w) / (d * d));
        }
    }
    best
}

/// Samples in mass coordinates: y strictly increasing, v = 1/ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianField {
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianField {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
}

/// Derivative estimates for a cubic Hermite representation (centred
/// differences inside, second-order one-sided at the ends).
fn slopes(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n == 2 {
        let s = (f[1] - f[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let s0 = (f[i] - f[i - 1]) / h0;
        let s1 = (f[i + 1] - f[i]) / h1;
        d[i] = (h1 * s0 + h0 * s1) / (h0 + h1);
    }
    let end = |x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64| {
        let h0 = x1 - x0;
        let h1 = x2 - x1;
        let s0 = (f1 - f0) / h0;
        let s1 = (f2 - f1) / h1;
        s0 - h0 * (s1 - s0) / (h0 + h1)
    };
    d[0] = end(x[0], x[1], x[2], f[0], f[1], f[2]);
    d[n - 1] = -end(-x[n - 1], -x[n - 2], -x[n - 3], f[n - 1], f[n - 2], f[n - 3]);
    d
}

/// Cumulative integral of the Hermite interpolant (trapezoid plus end
/// correction), starting from zero at x[0].
pub fn cumulative_integral(x: &[f64], f: &[f64]) -> Vec<f64> {
    let d = slopes(x, f);
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        let h = x[i] - x[i - 1];
        acc += 0.5 * h * (f[i - 1] + f[i]) + h * h * (d[i - 1] - d[i]) / 12.0;
        out.push(acc);
    }
    out
}

/// Fritsch–Carlson monotone cubic interpolation of (xs, fs) at `at`.
/// Outside the sample range the end values are held.
pub fn monotone_cubic(xs: &[f64], fs: &[f64], at: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 2 && fs.len() == n);
    let mut delta = vec![0.0; n - 1];
    for i in 0..n - 1 {
        delta[i] = (fs[i + 1] - fs[i]) / (xs[i + 1] - xs[i]);
    }
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let mut out = Vec::with_capacity(at.len());
    let mut k = 0usize;
    for &x in at {
        if x <= xs[0] {
            out.push(fs[0]);
            continue;
        }
        if x >= xs[n - 1] {
            out.push(fs[n - 1]);
            continue;
        }
        if !(xs[k] <= x && x <= xs[k + 1]) {
            k = xs.partition_point(|&t| t <= x).saturating_sub(1).min(n - 2);
        }
        let h = xs[k + 1] - xs[k];
        let t = (x - xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        out.push(h00 * fs[k] + h10 * h * m[k] + h01 * fs[k + 1] + h11 * h * m[k + 1]);
    }
    out
}

fn anchored_cumulative(x: &[f64], density: &[f64]) -> Vec<f64> {
    let mut y = cumulative_integral(x, density);
    // zero mass at x = 0 when the origin is sampled, else extend the first
    // sample's density down to the origin
    let offset = if x[0] <= 0.0 && 0.0 <= x[x.len() - 1] {
        -monotone_cubic(x, &y, &[0.0])[0]
    } else {
        density[0] * x[0]
    };
    for yi in y.iter_mut() {
        *yi += offset;
    }
    y
}

/// y = ∫_0^x ρ dx at the sample points; v = 1/ρ, velocity unchanged.
pub fn lagrange_of_euler(f: &EulerianField) -> Result<LagrangianField> {
    let n = f.x.len();
    if n < 3 || f.rho.len() != n || f.u.len() != n {
        return Err(Error::Shape("need at least 3 matching samples".into()));
    }
    if let Some(bad) = f.rho.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Vacuum(format!("density sample {bad} is not positive")));
    }
    let y = anchored_cumulative(&f.x, &f.rho);
    Ok(LagrangianField { y, v: f.rho.iter().map(|r| 1.0 / r).collect(), u: f.u.clone() })
}

/// Inverse map x = ∫_0^y v dy.
pub fn euler_of_lagrange(f: &LagrangianField) -> Result<EulerianField> {
    let n = f.y.len();
    if n < 3 || f.v.len() != n || f.u.len() != n {
        return Err(Error::Shape("need at least 3 matching samples".into()));
    }
    if let Some(bad) = f.v.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Vacuum(format!("volume sample {bad} is not positive")));
    }
    let x = anchored_cumulative(&f.y, &f.v);
    Ok(EulerianField { x, rho: f.v.iter().map(|v| 1.0 / v).collect(), u: f.u.clone() })
}

/// Resample a Lagrangian field onto a uniform y grid of `n` points.
pub fn resample_uniform(f: &LagrangianField, n: usize) -> LagrangianField {
    let (a, b) = (f.y[0], f.y[f.y.len() - 1]);
    let y: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    LagrangianField { v: monotone_cubic(&f.y, &f.v, &y), u: monotone_cubic(&f.y, &f.u, &y), y }
}

/// h = u - ν (μ̄_L(v)/v) v_x with centred differences on a uniform mesh.
pub fn effective_velocity(u: &[f64], v: &[f64], dx: f64, nu: f64, law: &GasLaw) -> Result<Vec<f64>> {
    let n = v.len();
    if n < 3 || u.len() != n {
        return Err(Error::Shape(format!("need at least 3 matching samples, got {n}")));
    }
    let mut h = Vec::with_capacity(n);
    for i in 0..n {
        let vx = if i == 0 {
            (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx)
        } else if i == n - 1 {
            (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx)
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * dx)
        };
        check_v(v[i])?;
        h.push(u[i] - nu * law.mu_bar_l(v[i]) / v[i] * vx);
    }
    Ok(h)
}
