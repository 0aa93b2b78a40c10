//! Smooth wave profiles at viscosity ν: travelling viscous shocks of the
//! BD system, smooth rarefactions and smooth pseudo-shocks, plus the
//! superposition that dresses a front configuration.

use crate::error::{Error, Result};
use crate::fronttrack::{Configuration, Front};
use crate::numerics::linear_fit;
use crate::riemann::{rh_residual, shock_speed, wave_by_size, Family, WaveDescriptor, WaveKind};
use crate::thermo::{from_riemann, to_riemann, GasLaw, LagrangianState};
use serde::{Deserialize, Serialize};

/// Stop the shock integration once |v - v±| falls below this fraction of |v₊ - v₋|.
const TAIL_STOP: f64 = 1e-12;
/// RK4 step as a fraction of the fastest linear rate at the endpoints.
const DEFAULT_STEP: f64 = 0.02;
const MAX_STEPS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    ViscousShock,
    SmoothRarefaction,
    SmoothPseudoShock,
}

impl ProfileKind {
    pub fn label(self) -> &'static str {
        match self {
            ProfileKind::ViscousShock => "viscous-shock",
            ProfileKind::SmoothRarefaction => "smooth-rarefaction",
            ProfileKind::SmoothPseudoShock => "smooth-pseudo-shock",
        }
    }
}

/// A smooth wave evaluated in the mass coordinate x.
///
/// Shocks keep the unit-viscosity profile sampled on a uniform ξ grid with
/// ξ = (x - centre)/ν; the other kinds are closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub kind: ProfileKind,
    pub family: Family,
    pub left: LagrangianState,
    pub right: LagrangianState,
    pub size: f64,
    pub nu: f64,
    pub speed: f64,
    pub centre: f64,
    /// Transition width √ρ of a pseudo-shock, 0 otherwise.
    pub width: f64,
    law: GasLaw,
    xi0: f64,
    dxi: f64,
    v: Vec<f64>,
}

/// Unit-viscosity right-hand side of μ(v)v^γ p(v)' = λ(v - v₋) + (p(v) - p₋)/λ.
fn shock_rhs(v: f64, vl: f64, lambda: f64, law: &GasLaw) -> f64 {
    let num = lambda * (v - vl) + (law.p(v) - law.p(vl)) / lambda;
    num / (law.mu(v) * v.powf(law.gamma) * law.dp(v))
}

fn rhs_slope(v: f64, vl: f64, lambda: f64, law: &GasLaw) -> f64 {
    let e = 1e-7 * v.abs().max(1e-3);
    (shock_rhs(v + e, vl, lambda, law) - shock_rhs(v - e, vl, lambda, law)) / (2.0 * e)
}

fn rk4(v: f64, step: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let k1 = f(v);
    let k2 = f(v + 0.5 * step * k1);
    let k3 = f(v + 0.5 * step * k2);
    let k4 = f(v + step * k3);
    v + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// φ(y) = ½∫_{-∞}^y e^{-|s|} ds.
pub fn phi(y: f64) -> f64 {
    if y < 0.0 {
        0.5 * y.exp()
    } else {
        1.0 - 0.5 * (-y).exp()
    }
}

/// Quintic smoothstep: 0 for t ≤ 0, 1 for t ≥ 1, C² in between.
pub fn phi_p(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

fn dphi_p(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Viscous k-shock joining `left` to `right` at viscosity ν, centred at 0.
pub fn viscous_shock_profile(left: LagrangianState, right: LagrangianState, family: Family, nu: f64, law: &GasLaw) -> Result<Profile> {
    viscous_shock_with_step(left, right, family, nu, law, DEFAULT_STEP)
}

/// As [`viscous_shock_profile`] with the RK4 step set to `step_factor`
/// divided by the fastest endpoint rate.
pub fn viscous_shock_with_step(
    left: LagrangianState,
    right: LagrangianState,
    family: Family,
    nu: f64,
    law: &GasLaw,
    step_factor: f64,
) -> Result<Profile> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("viscosity must be positive, got {nu}")));
    }
    if family == Family::Pseudo {
        return Err(Error::Kind("pseudo-shocks have no viscous profile".into()));
    }
    let wave = WaveDescriptor::physical(family, left, right, law).map_err(|e| Error::Consistency(format!("shock pair: {e}")))?;
    if wave.kind != WaveKind::Shock {
        return Err(Error::Consistency(format!("pair is not a shock (size {})", wave.size)));
    }
    let rh = rh_residual(left, right, law);
    if rh > 1e-9 {
        return Err(Error::Consistency(format!("Rankine-Hugoniot residual {rh:e}")));
    }
    let lambda = shock_speed(left, right, family, law)?;
    let (vl, vr) = (left.v, right.v);
    let dv = vr - vl;
    let f = |v: f64| shock_rhs(v, vl, lambda, law);
    let scale = dv.abs() * (law.p(vl).abs() + 1.0);
    if f(vr).abs() > 1e-8 * scale {
        return Err(Error::Consistency(format!("right state is not an equilibrium of the profile ODE (rhs {:e})", f(vr))));
    }
    let vc = 0.5 * (vl + vr);
    if f(vc) * dv <= 0.0 {
        return Err(Error::Consistency("profile ODE does not connect the states (Lax condition fails)".into()));
    }
    let k = rhs_slope(vl, vl, lambda, law).abs().max(rhs_slope(vr, vl, lambda, law).abs());
    let step = step_factor / k;
    let stop = (TAIL_STOP * dv.abs()).max(1e-13 * vl.abs().max(vr.abs()));
    let march = |dir: f64, target: f64| -> Result<Vec<f64>> {
        let mut out = vec![vc];
        let mut v = vc;
        while (v - target).abs() > stop {
            let next = rk4(v, dir * step, &f);
            // round-off fixed point next to the target
            if (next - v).abs() <= 4.0 * f64::EPSILON * v.abs() && (next - target).abs() < 1e-10 * v.abs() {
                break;
            }
            v = next;
            out.push(v);
            if out.len() > MAX_STEPS {
                return Err(Error::Numerical { what: "viscous shock integration".into(), residual: (v - target).abs() });
            }
        }
        Ok(out)
    };
    let fwd = march(1.0, vr)?;
    let bwd = march(-1.0, vl)?;
    let mut v: Vec<f64> = bwd.iter().rev().copied().collect();
    v.extend_from_slice(&fwd[1..]);
    let xi0 = -((bwd.len() - 1) as f64) * step;
    Ok(Profile {
        kind: ProfileKind::ViscousShock,
        family,
        left,
        right,
        size: wave.size,
        nu,
        speed: lambda,
        centre: 0.0,
        width: 0.0,
        law: *law,
        xi0,
        dxi: step,
        v,
    })
}

/// Smooth k-rarefaction of size σ > 0 starting at `left`.
pub fn smooth_rarefaction(left: LagrangianState, sigma: f64, family: Family, nu: f64, law: &GasLaw) -> Result<Profile> {
    if !(sigma > 0.0) {
        return Err(Error::Kind(format!("smooth rarefaction needs a positive size, got {sigma}")));
    }
    if family == Family::Pseudo {
        return Err(Error::Kind("pseudo-shocks are not rarefactions".into()));
    }
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("viscosity must be positive, got {nu}")));
    }
    let right = from_riemann(wave_by_size(to_riemann(left, law)?, family, sigma, law)?, law)?;
    let speed = crate::riemann::front_speed(family, left, right, law);
    Ok(Profile {
        kind: ProfileKind::SmoothRarefaction,
        family,
        left,
        right,
        size: sigma,
        nu,
        speed,
        centre: 0.0,
        width: 0.0,
        law: *law,
        xi0: 0.0,
        dxi: 0.0,
        v: Vec::new(),
    })
}

/// Smooth pseudo-shock over width √ρ; h must not decrease across it.
pub fn smooth_pseudo_shock(left: LagrangianState, right: LagrangianState, rho: f64, law: &GasLaw) -> Result<Profile> {
    if right.h < left.h {
        return Err(Error::Monotonicity(format!("pseudo-shock lowers h from {} to {}", left.h, right.h)));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let size = WaveDescriptor::pseudo(left, right, law).size;
    Ok(Profile {
        kind: ProfileKind::SmoothPseudoShock,
        family: Family::Pseudo,
        left,
        right,
        size,
        nu: 0.0,
        speed: 0.0,
        centre: 0.0,
        width: rho.sqrt(),
        law: *law,
        xi0: 0.0,
        dxi: 0.0,
        v: Vec::new(),
    })
}

/// Profile of a tracked front, centred at its viscous centre.
pub fn profile_of_front(front: &Front, nu: f64, rho: f64, law: &GasLaw) -> Result<Profile> {
    let w = &front.wave;
    let p = match w.kind {
        WaveKind::Shock => viscous_shock_profile(w.left, w.right, w.family, nu, law)?,
        WaveKind::Rarefaction => smooth_rarefaction(w.left, w.size, w.family, nu, law)?,
        WaveKind::PseudoShock => smooth_pseudo_shock(w.left, w.right, rho, law)?,
    };
    Ok(p.at(front.centre()))
}

/// One profile per front of the configuration.
pub fn profiles_of(config: &Configuration, nu: f64, rho: f64, law: &GasLaw) -> Result<Vec<Profile>> {
    config.fronts.iter().map(|f| profile_of_front(f, nu, rho, law)).collect()
}

impl Profile {
    /// Same profile re-centred at `centre`.
    pub fn at(mut self, centre: f64) -> Profile {
        self.centre = centre;
        self
    }

    pub fn law(&self) -> &GasLaw {
        &self.law
    }

    pub fn is_physical(&self) -> bool {
        self.kind != ProfileKind::SmoothPseudoShock
    }

    /// Sampled unit-profile grid of a shock: (ξ, v).
    pub fn shock_samples(&self) -> (Vec<f64>, &[f64]) {
        let xi = (0..self.v.len()).map(|i| self.xi0 + i as f64 * self.dxi).collect();
        (xi, &self.v)
    }

    pub fn grid_step(&self) -> f64 {
        self.dxi
    }

    /// Half-width outside which the profile is within `tol` of its end states.
    pub fn reach(&self, tol: f64) -> f64 {
        match self.kind {
            ProfileKind::ViscousShock => {
                let scale = (self.right.v - self.left.v).abs();
                let mut lo = 0;
                let mut hi = self.v.len() - 1;
                while lo < hi && (self.v[lo] - self.left.v).abs() <= tol * scale {
                    lo += 1;
                }
                while hi > lo && (self.v[hi] - self.right.v).abs() <= tol * scale {
                    hi -= 1;
                }
                let a = (self.xi0 + lo as f64 * self.dxi).abs();
                let b = (self.xi0 + hi as f64 * self.dxi).abs();
                self.nu * a.max(b) + self.nu * self.dxi
            }
            ProfileKind::SmoothRarefaction => self.nu / self.size * (0.5 / tol.max(1e-300)).ln().max(0.0),
            ProfileKind::SmoothPseudoShock => 0.5 * self.width,
        }
    }

    fn shock_v(&self, xi: f64) -> f64 {
        let n = self.v.len();
        let t = (xi - self.xi0) / self.dxi;
        if t <= 0.0 {
            return self.left.v;
        }
        if t >= (n - 1) as f64 {
            return self.right.v;
        }
        let i = (t.floor() as usize).min(n - 2);
        let s = t - i as f64;
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let lam = self.speed;
        let vl = self.left.v;
        let d0 = shock_rhs(v0, vl, lam, &self.law) * self.dxi;
        let d1 = shock_rhs(v1, vl, lam, &self.law) * self.dxi;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * v0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * v1 + (s3 - s2) * d1
    }

    fn rarefaction_coords(&self, x: f64) -> (crate::thermo::RiemannCoords, f64) {
        let y = self.size * (x - self.centre) / self.nu;
        let base = to_riemann(self.left, &self.law).expect("left state is valid");
        let a = self.size * phi(y);
        let rc = match self.family {
            Family::Backward => crate::thermo::RiemannCoords { r: base.r + a, s: base.s },
            _ => crate::thermo::RiemannCoords { r: base.r, s: base.s + a },
        };
        (rc, y)
    }

    /// State at mass coordinate x.
    pub fn state(&self, x: f64) -> LagrangianState {
        match self.kind {
            ProfileKind::ViscousShock => {
                let v = self.shock_v((x - self.centre) / self.nu);
                let h = self.left.h + (self.law.p(v) - self.law.p(self.left.v)) / self.speed;
                LagrangianState { v, h }
            }
            ProfileKind::SmoothRarefaction => {
                let (rc, _) = self.rarefaction_coords(x);
                LagrangianState { v: self.law.v_of_z(rc.z()), h: rc.h() }
            }
            ProfileKind::SmoothPseudoShock => {
                let t = phi_p((x - self.centre) / self.width + 0.5);
                LagrangianState {
                    v: self.left.v + (self.right.v - self.left.v) * t,
                    h: self.left.h + (self.right.h - self.left.h) * t,
                }
            }
        }
    }

    /// (∂ₓv, ∂ₓh) at x.
    pub fn derivative(&self, x: f64) -> (f64, f64) {
        match self.kind {
            ProfileKind::ViscousShock => {
                let v = self.shock_v((x - self.centre) / self.nu);
                let vx = shock_rhs(v, self.left.v, self.speed, &self.law) / self.nu;
                (vx, self.law.dp(v) * vx / self.speed)
            }
            ProfileKind::SmoothRarefaction => {
                let (rc, y) = self.rarefaction_coords(x);
                let amp = self.size * self.size / (2.0 * self.nu) * (-y.abs()).exp();
                let v = self.law.v_of_z(rc.z());
                // dz/dv = -(γ-1)/2 · z/v
                let dzdv = -(self.law.gamma - 1.0) / 2.0 * rc.z() / v;
                let (dz, dh) = match self.family {
                    Family::Backward => (-0.5, 0.5),
                    _ => (0.5, 0.5),
                };
                (amp * dz / dzdv, amp * dh)
            }
            ProfileKind::SmoothPseudoShock => {
                let d = dphi_p((x - self.centre) / self.width + 0.5) / self.width;
                ((self.right.v - self.left.v) * d, (self.right.h - self.left.h) * d)
            }
        }
    }

    /// Rows (ξ, v, h) with ξ = (x - centre)/ν for physical waves and
    /// (x - centre)/√ρ for pseudo-shocks.
    pub fn export(&self, n: usize) -> Vec<[f64; 3]> {
        match self.kind {
            ProfileKind::ViscousShock => {
                let (xi, v) = self.shock_samples();
                let stride = (xi.len() / n.max(2)).max(1);
                let mut out: Vec<[f64; 3]> = xi
                    .iter()
                    .zip(v)
                    .step_by(stride)
                    .map(|(&x, &v)| [x, v, self.left.h + (self.law.p(v) - self.law.p(self.left.v)) / self.speed])
                    .collect();
                let last = *xi.last().unwrap();
                if out.last().map(|r| r[0]) != Some(last) {
                    let v = *v.last().unwrap();
                    out.push([last, v, self.left.h + (self.law.p(v) - self.law.p(self.left.v)) / self.speed]);
                }
                out
            }
            _ => {
                let (scale, half) = match self.kind {
                    ProfileKind::SmoothPseudoShock => (self.width, 0.75),
                    _ => (self.nu, self.reach(1e-12) / self.nu),
                };
                let n = n.max(2);
                (0..n)
                    .map(|i| {
                        let xi = -half + 2.0 * half * i as f64 / (n - 1) as f64;
                        let s = self.state(self.centre + xi * scale);
                        [xi, s.v, s.h]
                    })
                    .collect()
            }
        }
    }
}

/// Checks on a single viscous shock profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockProfileReport {
    pub endpoint_error: f64,
    pub monotone: bool,
    pub overshoot: f64,
    /// Max-norm residual of the second-order travelling-wave system at the
    /// default step and at half of it.
    pub residual_coarse: f64,
    pub residual_fine: f64,
    pub residual_order: f64,
    pub tail: TailFit,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Decay rate from a log-linear fit of |v - v₊| for ξ > 0.
    pub rate_fit: f64,
    /// Linearised rate |f'(v₊)| of the reduced ODE.
    pub rate_linear: f64,
    /// rate_fit / |σ|, the constant c in C|σ|exp(-c|σ|ξ).
    pub c_rate: f64,
    /// Smallest C with |v - v₊| ≤ C|σ|exp(-rate_fit ξ) on the fitted range.
    pub c_amp: f64,
}

impl TailFit {
    pub fn relative_error(&self) -> f64 {
        (self.rate_fit / self.rate_linear - 1.0).abs()
    }
}

impl ShockProfileReport {
    pub fn pass(&self) -> bool {
        self.endpoint_error < 1e-8 && self.monotone && self.overshoot < 1e-12 && self.residual_order >= 1.9 && self.tail.relative_error() < 0.2
    }
}

/// Max-norm residual of -λv' - h' + (μv^γ p(v)')' at interior grid nodes
/// of the unit profile, with h from the algebraic relation.
pub fn travelling_wave_residual(p: &Profile) -> f64 {
    let law = &p.law;
    let d = p.dxi;
    let lam = p.speed;
    let hs: Vec<f64> = p.v.iter().map(|&v| p.left.h + (law.p(v) - law.p(p.left.v)) / lam).collect();
    let flux = |i: usize| {
        let vm = 0.5 * (p.v[i] + p.v[i + 1]);
        law.mu(vm) * vm.powf(law.gamma) * (law.p(p.v[i + 1]) - law.p(p.v[i])) / d
    };
    let mut worst: f64 = 0.0;
    for i in 1..p.v.len() - 1 {
        let vx = (p.v[i + 1] - p.v[i - 1]) / (2.0 * d);
        let hx = (hs[i + 1] - hs[i - 1]) / (2.0 * d);
        let diff = (flux(i) - flux(i - 1)) / d;
        worst = worst.max((-lam * vx - hx + diff).abs());
    }
    worst
}

/// Log-linear fit of the right tail against the linearised rate.
pub fn tail_fit(p: &Profile) -> Result<TailFit> {
    if p.kind != ProfileKind::ViscousShock {
        return Err(Error::Kind("tail fit needs a viscous shock".into()));
    }
    let dv = (p.right.v - p.left.v).abs();
    let (xi, v) = p.shock_samples();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (x, v) in xi.iter().zip(v) {
        let e = (v - p.right.v).abs();
        if *x > 0.0 && e < 1e-3 * dv && e > 1e-10 * dv {
            xs.push(*x);
            ys.push(e.ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::Numerical { what: "tail fit: too few samples".into(), residual: xs.len() as f64 });
    }
    let (slope, _) = linear_fit(&xs, &ys);
    let rate_fit = -slope;
    let rate_linear = rhs_slope(p.right.v, p.left.v, p.speed, &p.law).abs();
    let sigma = p.size.abs();
    let c_amp = xs.iter().zip(&ys).map(|(x, y)| (y + rate_fit * x).exp() / sigma).fold(0.0, f64::max);
    Ok(TailFit { rate_fit, rate_linear, c_rate: rate_fit / sigma, c_amp })
}

/// Endpoint, monotonicity, refinement and tail checks for one shock pair.
pub fn check_viscous_shock(left: LagrangianState, right: LagrangianState, family: Family, law: &GasLaw) -> Result<ShockProfileReport> {
    let coarse = viscous_shock_with_step(left, right, family, 1.0, law, DEFAULT_STEP)?;
    let fine = viscous_shock_with_step(left, right, family, 1.0, law, 0.5 * DEFAULT_STEP)?;
    let v = &coarse.v;
    let endpoint_error = (v[0] - left.v).abs().max((v[v.len() - 1] - right.v).abs());
    let up = right.v > left.v;
    let monotone = v.windows(2).all(|w| if up { w[1] > w[0] } else { w[1] < w[0] });
    let (lo, hi) = if up { (left.v, right.v) } else { (right.v, left.v) };
    let overshoot = v.iter().map(|&x| (lo - x).max(x - hi).max(0.0)).fold(0.0, f64::max);
    let rc = travelling_wave_residual(&coarse);
    let rf = travelling_wave_residual(&fine);
    Ok(ShockProfileReport {
        endpoint_error,
        monotone,
        overshoot,
        residual_coarse: rc,
        residual_fine: rf,
        residual_order: (rc / rf).log2(),
        tail: tail_fit(&coarse)?,
        samples: v.len(),
    })
}

/// Ū(x) = U* + Σᵢ (Uᵢ(x) - Uᵢ,₋) on the given points, with U* the far-left
/// state of the configuration.
pub fn assemble(config: &Configuration, profiles: &[Profile], x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if profiles.len() != config.fronts.len() {
        return Err(Error::Shape(format!("{} profiles for {} fronts", profiles.len(), config.fronts.len())));
    }
    let base = config.left_state();
    let mut v = vec![base.v; x.len()];
    let mut h = vec![base.h; x.len()];
    for p in profiles {
        for (k, &xk) in x.iter().enumerate() {
            let s = p.state(xk);
            v[k] += s.v - p.left.v;
            h[k] += s.h - p.left.h;
        }
    }
    Ok((v, h))
}

/// Pointwise derivative of the assembled field.
pub fn assemble_derivative(profiles: &[Profile], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut vx = vec![0.0; x.len()];
    let mut hx = vec![0.0; x.len()];
    for p in profiles {
        for (k, &xk) in x.iter().enumerate() {
            let (a, b) = p.derivative(xk);
            vx[k] += a;
            hx[k] += b;
        }
    }
    (vx, hx)
}

/// Interaction of neighbouring profiles near each front.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TailReport {
    /// max over fronts i and foreign waves j of sup over |x - yᵢ| ≤ √ρ of
    /// |Uⱼ(x) - Uⱼ(side)|, divided by ν/√ρ.
    pub foreign_ratio: f64,
    /// max over pseudo-shock pairs of ∫|∂ₓvᵢ||∂ₓvⱼ|.
    pub np_np_product: f64,
    /// max over shock / pseudo-shock pairs of ∫ outside the shock's interval
    /// of |∂ₓṽ||∂ₓv^P|, divided by |σ_NP|ν/ρ.
    pub shock_np_ratio: f64,
}

/// Evaluates the near-field tail bounds of a dressed configuration.
pub fn tail_checks(profiles: &[Profile], rho: f64, nu: f64) -> TailReport {
    let w = rho.sqrt();
    let n = 129;
    let mut rep = TailReport::default();
    let centre = |p: &Profile| p.centre;
    for (i, pi) in profiles.iter().enumerate() {
        let c = centre(pi);
        for (j, pj) in profiles.iter().enumerate() {
            if i == j {
                continue;
            }
            let side = if pj.centre < c { pj.right } else { pj.left };
            let mut dev: f64 = 0.0;
            for k in 0..n {
                let x = c - w + 2.0 * w * k as f64 / (n - 1) as f64;
                let s = pj.state(x);
                dev = dev.max((s.v - side.v).abs().max((s.h - side.h).abs()));
            }
            rep.foreign_ratio = rep.foreign_ratio.max(dev / (nu / w));
        }
    }
    let product = |a: &Profile, b: &Profile, skip: Option<(f64, f64)>| {
        let lo = (a.centre - a.reach(1e-14)).max(b.centre - b.reach(1e-14));
        let hi = (a.centre + a.reach(1e-14)).min(b.centre + b.reach(1e-14));
        if hi <= lo {
            return 0.0;
        }
        let m = 4001;
        let dx = (hi - lo) / (m - 1) as f64;
        let vals: Vec<f64> = (0..m)
            .map(|k| {
                let x = lo + k as f64 * dx;
                if let Some((s0, s1)) = skip {
                    if x >= s0 && x <= s1 {
                        return 0.0;
                    }
                }
                (a.derivative(x).0 * b.derivative(x).0).abs()
            })
            .collect();
        crate::numerics::simpson(&vals, dx)
    };
    for (i, a) in profiles.iter().enumerate() {
        for b in profiles.iter().skip(i + 1) {
            match (a.kind, b.kind) {
                (ProfileKind::SmoothPseudoShock, ProfileKind::SmoothPseudoShock) => {
                    rep.np_np_product = rep.np_np_product.max(product(a, b, None));
                }
                (ProfileKind::ViscousShock, ProfileKind::SmoothPseudoShock) | (ProfileKind::SmoothPseudoShock, ProfileKind::ViscousShock) => {
                    let (s, np) = if a.kind == ProfileKind::ViscousShock { (a, b) } else { (b, a) };
                    let val = product(s, np, Some((s.centre - w, s.centre + w)));
                    rep.shock_np_ratio = rep.shock_np_ratio.max(val / (np.size * nu / rho));
                }
                _ => {}
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::wave_by_size;

    fn shock_pair(sigma: f64, family: Family, law: &GasLaw) -> (LagrangianState, LagrangianState) {
        let l = LagrangianState { v: 1.0, h: 0.0 };
        let r = from_riemann(wave_by_size(to_riemann(l, law).unwrap(), family, sigma, law).unwrap(), law).unwrap();
        (l, r)
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0), 0.5);
        assert!((phi(60.0) - 1.0).abs() < 1e-15);
        assert_eq!(phi_p(-1.0), 0.0);
        assert_eq!(phi_p(2.0), 1.0);
        assert!((phi_p(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn endpoints_are_equilibria() {
        let law = GasLaw::default();
        let (l, r) = shock_pair(-0.1, Family::Backward, &law);
        let lam = shock_speed(l, r, Family::Backward, &law).unwrap();
        assert_eq!(shock_rhs(l.v, l.v, lam, &law), 0.0);
        assert!(shock_rhs(r.v, l.v, lam, &law).abs() < 1e-13);
    }

    #[test]
    fn backward_and_forward_profiles_pass() {
        for law in [GasLaw::default(), GasLaw::air()] {
            for fam in [Family::Backward, Family::Forward] {
                let (l, r) = shock_pair(-0.1, fam, &law);
                let rep = check_viscous_shock(l, r, fam, &law).unwrap();
                assert!(rep.pass(), "{fam:?} {rep:?}");
            }
        }
    }

    #[test]
    fn centred_at_mean() {
        let law = GasLaw::default();
        let (l, r) = shock_pair(-0.2, Family::Backward, &law);
        let p = viscous_shock_profile(l, r, Family::Backward, 1.0, &law).unwrap();
        assert!((p.state(0.0).v - 0.5 * (l.v + r.v)).abs() < 1e-14);
    }

    #[test]
    fn rescaling_is_exact() {
        let law = GasLaw::default();
        let (l, r) = shock_pair(-0.1, Family::Forward, &law);
        let p1 = viscous_shock_profile(l, r, Family::Forward, 1.0, &law).unwrap();
        let pn = viscous_shock_profile(l, r, Family::Forward, 1e-3, &law).unwrap();
        for x in [-30.0, -1.0, 0.3, 5.0, 40.0] {
            assert_eq!(p1.state(x).v, pn.state(x * 1e-3).v);
        }
    }

    #[test]
    fn rejects_rarefaction_pair() {
        let law = GasLaw::default();
        let (l, r) = shock_pair(0.1, Family::Backward, &law);
        assert!(matches!(viscous_shock_profile(l, r, Family::Backward, 1.0, &law), Err(Error::Consistency(_))));
        let (l, r) = shock_pair(-0.1, Family::Backward, &law);
        let bad = LagrangianState { v: r.v, h: r.h + 0.01 };
        assert!(matches!(viscous_shock_profile(l, bad, Family::Backward, 1.0, &law), Err(Error::Consistency(_))));
    }

    #[test]
    fn rarefaction_limits_and_derivative() {
        let law = GasLaw::default();
        let l = LagrangianState { v: 1.0, h: 0.0 };
        for fam in [Family::Backward, Family::Forward] {
            let p = smooth_rarefaction(l, 0.2, fam, 0.01, &law).unwrap();
            let far = p.state(100.0);
            assert!((far.v - p.right.v).abs() < 1e-12 && (far.h - p.right.h).abs() < 1e-12);
            let mut errs = Vec::new();
            for e in [1e-4, 5e-5] {
                let x = 0.013;
                let a = p.state(x + e);
                let b = p.state(x - e);
                let (vx, hx) = p.derivative(x);
                errs.push(((a.v - b.v) / (2.0 * e) - vx).abs() + ((a.h - b.h) / (2.0 * e) - hx).abs());
            }
            assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
        }
        assert!(matches!(smooth_rarefaction(l, -0.1, Family::Backward, 0.01, &law), Err(Error::Kind(_))));
    }

    #[test]
    fn pseudo_shock_shape() {
        let law = GasLaw::default();
        let l = LagrangianState { v: 1.0, h: 0.0 };
        let r = LagrangianState { v: 1.01, h: 0.005 };
        let p = smooth_pseudo_shock(l, r, 1e-4, &law).unwrap();
        assert_eq!(p.state(-0.005).v, l.v);
        assert_eq!(p.state(0.005).v, r.v);
        assert_eq!(p.derivative(0.0051), (0.0, 0.0));
        for k in 0..101 {
            assert!(p.derivative(-0.006 + 0.012 * k as f64 / 100.0).1 >= 0.0);
        }
        let c = smooth_pseudo_shock(l, l, 1e-4, &law).unwrap();
        assert_eq!(c.state(0.0), l);
        assert!(matches!(smooth_pseudo_shock(r, l, 1e-4, &law), Err(Error::Monotonicity(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn random_shocks_have_checked_profiles(sigma in -0.5f64..-0.005, fwd in any::<bool>(), air in any::<bool>()) {
                let law = if air { GasLaw::air() } else { GasLaw::default() };
                let family = if fwd { Family::Forward } else { Family::Backward };
                let (l, r) = shock_pair(sigma, family, &law);
                let rep = check_viscous_shock(l, r, family, &law).unwrap();
                prop_assert!(rep.pass(), "{rep:?}");
            }
        }
    }
}
