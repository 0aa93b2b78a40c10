//! Weighted relative entropy around a dressed front configuration: shock
//! weights, shift ODE right-hand sides, the functionals F, G, Y and J_bad,
//! and the weight-decay check at interaction times.

use crate::error::{Error, Result};
use crate::fronttrack::{Configuration, InteractionEvent, SchedulerParams};
use crate::glimm::functionals;
use crate::numerics::simpson;
use crate::profiles::{profile_of_front, Profile, ProfileKind};
use crate::riemann::{Family, WaveKind};
use crate::thermo::{viscosity, GasLaw};
use serde::{Deserialize, Serialize};

/// Samples of (v, h) on the uniform grid x_k = x0 + k·dx.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformField {
    pub x0: f64,
    pub dx: f64,
    pub v: Vec<f64>,
    pub h: Vec<f64>,
}

impl UniformField {
    pub fn new(x0: f64, dx: f64, v: Vec<f64>, h: Vec<f64>) -> Result<UniformField> {
        if v.len() != h.len() || v.len() < 3 {
            return Err(Error::Shape(format!("need matching arrays of length >= 3, got {} and {}", v.len(), h.len())));
        }
        if !(dx > 0.0) {
            return Err(Error::Domain(format!("grid step must be positive, got {dx}")));
        }
        if let Some(k) = v.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Vacuum(format!("v = {} at x = {}", v[k], x0 + k as f64 * dx)));
        }
        Ok(UniformField { x0, dx, v, h })
    }

    /// Sum of the profiles on [x0, x0 + (n-1)dx], anchored at the far-left state.
    pub fn from_profiles(config: &Configuration, profiles: &[Profile], x0: f64, dx: f64, n: usize) -> Result<UniformField> {
        let x: Vec<f64> = (0..n).map(|k| x0 + k as f64 * dx).collect();
        let (v, h) = crate::profiles::assemble(config, profiles, &x)?;
        UniformField::new(x0, dx, v, h)
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.x(k)).collect()
    }

    fn same_grid(&self, o: &UniformField) -> Result<()> {
        if self.len() != o.len() || (self.x0 - o.x0).abs() > 1e-12 * self.dx || (self.dx - o.dx).abs() > 1e-12 * self.dx {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        Ok(())
    }
}

/// η(U|Ū) = |h - h̄|²/2 + Q(v|v̄) pointwise.
pub fn relative_entropy_field(u: &UniformField, ub: &UniformField, law: &GasLaw) -> Result<Vec<f64>> {
    u.same_grid(ub)?;
    Ok((0..u.len()).map(|k| 0.5 * (u.h[k] - ub.h[k]).powi(2) + law.rel_q(u.v[k], ub.v[k])).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionParams {
    pub delta_star: f64,
    pub kappa: f64,
    /// Constant C in front of the δ* and 1/δ* terms of J_bad.
    pub c_bad: f64,
}

impl ContractionParams {
    /// δ* = √ε.
    pub fn new(eps: f64, kappa: f64) -> Result<ContractionParams> {
        let p = ContractionParams { delta_star: eps.sqrt(), kappa, c_bad: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_star > 0.0) {
            return Err(Error::Config(format!("delta_star must be positive, got {}", self.delta_star)));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::Config(format!("kappa must be non-negative, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Global weight a(x) and the per-shock derivatives (aᵢ)ₓ.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub a: Vec<f64>,
    /// Indices into the profile list of the shocks carrying a weight.
    pub shocks: Vec<usize>,
    /// (aᵢ)ₓ = -∂ₓp(ṽᵢ)/δ*, one row per entry of `shocks`.
    pub a_x: Vec<Vec<f64>>,
    /// (L̄ + κQ̄)/δ*.
    pub offset: f64,
    pub delta_star: f64,
}

/// (L̄ + κQ̄) of a configuration.
pub fn weight_base(config: &Configuration, kappa: f64, law: &GasLaw) -> f64 {
    let s = functionals(config, law);
    s.lbar + kappa * s.qbar
}

/// a = 1 + (1/δ*)[(L̄+κQ̄) + Σ_shocks -(p(ṽᵢ(x)) - p(vᵢ,₋))] on the grid.
pub fn build_weights(grid: &UniformField, profiles: &[Profile], base: f64, delta_star: f64) -> Result<WeightField> {
    if !(delta_star > 0.0) {
        return Err(Error::Config(format!("delta_star must be positive, got {delta_star}")));
    }
    let n = grid.len();
    let offset = base / delta_star;
    let mut a = vec![1.0 + offset; n];
    let mut shocks = Vec::new();
    let mut a_x = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        if p.kind != ProfileKind::ViscousShock {
            continue;
        }
        let law = p.law();
        let pl = law.p(p.left.v);
        let mut row = vec![0.0; n];
        for k in 0..n {
            let x = grid.x(k);
            let s = p.state(x);
            a[k] -= (law.p(s.v) - pl) / delta_star;
            row[k] = -law.dp(s.v) * p.derivative(x).0 / delta_star;
        }
        shocks.push(i);
        a_x.push(row);
    }
    Ok(WeightField { a, shocks, a_x, offset, delta_star })
}

/// Φ_ε(y): 0 for y ≤ 0, -y/ε⁴ up to ε², then -1/ε².
pub fn phi_eps(eps: f64, y: f64) -> f64 {
    let e2 = eps * eps;
    if y <= 0.0 {
        0.0
    } else if y <= e2 {
        -y / (e2 * e2)
    } else {
        -1.0 / e2
    }
}

/// Ẋᵢ for a shock of size σ and speed λ̃ given Yᵢ and J_bad.
pub fn shock_shift_step(y: f64, sigma: f64, lambda: f64, j_bad: f64, family: Family) -> f64 {
    let g = 2.0 * j_bad.abs() + 1.0;
    let s2 = sigma * sigma;
    match family {
        Family::Forward => -phi_eps(sigma, -y) * g + s2 * lambda / 2.0 * phi_eps(sigma, y),
        _ => phi_eps(sigma, y) * g + s2 * lambda / 2.0 * phi_eps(sigma, -y),
    }
}

/// Yᵢ = -∫(aᵢ)ₓη(U|Ū) + ∫a[-p'(v̄)(v - v̄)∂ₓṽᵢ + (h - h̄)∂ₓh̃ᵢ] for the
/// k-th weighted shock.
pub fn y_functional(u: &UniformField, ub: &UniformField, w: &WeightField, k: usize, profiles: &[Profile], law: &GasLaw) -> Result<f64> {
    u.same_grid(ub)?;
    check_weights(u, w)?;
    let p = profiles.get(*w.shocks.get(k).ok_or_else(|| Error::Shape(format!("no weighted shock {k}")))?).ok_or_else(|| Error::Shape("profile list shorter than weights".into()))?;
    let eta = relative_entropy_field(u, ub, law)?;
    let f: Vec<f64> = (0..u.len())
        .map(|m| {
            let (vx, hx) = p.derivative(u.x(m));
            -w.a_x[k][m] * eta[m] + w.a[m] * (-law.dp(ub.v[m]) * (u.v[m] - ub.v[m]) * vx + (u.h[m] - ub.h[m]) * hx)
        })
        .collect();
    Ok(simpson(&f, u.dx))
}

fn check_weights(u: &UniformField, w: &WeightField) -> Result<()> {
    if w.a.len() != u.len() {
        return Err(Error::Shape(format!("weight has {} samples, field {}", w.a.len(), u.len())));
    }
    Ok(())
}

/// J_bad: the two H̄₁ terms, Cδ*Σ∫|(ṽᵢ)ₓ|p(v|v̄) and
/// (Cν/δ*)∫(Σ|(aᵢ)ₓ|)² v^β |p(v) - p(v̄)|² with β = γ - α, in physical x.
pub fn j_bad(u: &UniformField, ub: &UniformField, w: &WeightField, profiles: &[Profile], params: &ContractionParams, law: &GasLaw) -> Result<f64> {
    u.same_grid(ub)?;
    check_weights(u, w)?;
    let beta = law.gamma - law.alpha;
    let c = params.c_bad;
    let ds = params.delta_star;
    let nu = w.shocks.first().map_or(1.0, |&i| profiles[i].nu);
    let mut f = vec![0.0; u.len()];
    #[allow(clippy::needless_range_loop)]
    for m in 0..u.len() {
        let dp = law.p(u.v[m]) - law.p(ub.v[m]);
        let rp = law.rel_p(u.v[m], ub.v[m]);
        let mut sum_ax = 0.0;
        for (k, &i) in w.shocks.iter().enumerate() {
            let p = &profiles[i];
            let vx = p.derivative(u.x(m)).0;
            f[m] += w.a_x[k][m] * dp * (u.h[m] - ub.h[m]);
            f[m] += p.speed * w.a[m] * vx * rp;
            f[m] += c * ds * vx.abs() * rp;
            sum_ax += w.a_x[k][m].abs();
        }
        f[m] += c * nu / ds * sum_ax * sum_ax * u.v[m].powf(beta) * dp * dp;
    }
    Ok(simpson(&f, u.dx))
}

/// Λ̇ᵢ = Fᵢ((u)_R) with (u)_R the ∂ₓh^R-weighted mean of the velocity.
pub fn rarefaction_shift_step(grid: &UniformField, velocity: &[f64], profile: &Profile) -> Result<f64> {
    if profile.kind != ProfileKind::SmoothRarefaction {
        return Err(Error::Kind("rarefaction shift needs a smooth rarefaction".into()));
    }
    if velocity.len() != grid.len() {
        return Err(Error::Shape(format!("velocity has {} samples, grid {}", velocity.len(), grid.len())));
    }
    let weight: Vec<f64> = (0..grid.len()).map(|m| profile.derivative(grid.x(m)).1).collect();
    let total = simpson(&weight, grid.dx);
    let law = profile.law();
    let speed = |v: f64| match profile.family {
        Family::Backward => -law.c(v),
        _ => law.c(v),
    };
    let (lo, hi) = (speed(profile.left.v), speed(profile.right.v));
    if !(total.abs() > 1e-14) {
        log::warn!("rarefaction weight vanishes on the grid; using the midpoint speed");
        return Ok(0.5 * (lo + hi));
    }
    let wu: Vec<f64> = weight.iter().zip(velocity).map(|(a, b)| a * b).collect();
    Ok(rarefaction_speed(simpson(&wu, grid.dx) / total, lo, hi))
}

/// Fᵢ(y): `lo` for y ≥ 1, `hi` for y ≤ -1, linear in between.
pub fn rarefaction_speed(y: f64, lo: f64, hi: f64) -> f64 {
    let t = y.clamp(-1.0, 1.0);
    0.5 * (lo + hi) + 0.5 * t * (lo - hi)
}

/// Terms of G_ν.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GReport {
    pub diffusion_mu1: f64,
    pub diffusion_mu2: f64,
    pub wave_term: f64,
}

impl GReport {
    pub fn total(&self) -> f64 {
        self.diffusion_mu1 + self.diffusion_mu2 + self.wave_term
    }
}

/// ν∫μ₁v^γ|(p(v) - p(v̄))ₓ|², ν∫μ₂v^γ|p(v)ₓ|² and Σᵢ∫|Vᵢ|p(v|v̄) over
/// physical waves.
pub fn g_functional(u: &UniformField, ub: &UniformField, profiles: &[Profile], nu: f64, law: &GasLaw) -> Result<GReport> {
    u.same_grid(ub)?;
    let n = u.len();
    let pu: Vec<f64> = u.v.iter().map(|&v| law.p(v)).collect();
    let diff: Vec<f64> = pu.iter().zip(&ub.v).map(|(p, &vb)| p - law.p(vb)).collect();
    let dpu = crate::numerics::gradient(&pu, u.dx);
    let ddiff = crate::numerics::gradient(&diff, u.dx);
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    let mut f3 = vec![0.0; n];
    for m in 0..n {
        let (_, mu1, mu2) = viscosity(u.v[m], law)?;
        let vg = u.v[m].powf(law.gamma);
        f1[m] = mu1 * vg * ddiff[m] * ddiff[m];
        f2[m] = mu2 * vg * dpu[m] * dpu[m];
        let rp = law.rel_p(u.v[m], ub.v[m]);
        for p in profiles.iter().filter(|p| p.is_physical()) {
            let (a, b) = p.derivative(u.x(m));
            f3[m] += a.hypot(b) * rp;
        }
    }
    Ok(GReport { diffusion_mu1: nu * simpson(&f1, u.dx), diffusion_mu2: nu * simpson(&f2, u.dx), wave_term: simpson(&f3, u.dx) })
}

/// F = ∫a η(U|Ū).
pub fn weighted_entropy(u: &UniformField, ub: &UniformField, a: &[f64], law: &GasLaw) -> Result<f64> {
    let eta = relative_entropy_field(u, ub, law)?;
    if a.len() != eta.len() {
        return Err(Error::Shape(format!("weight has {} samples, field {}", a.len(), eta.len())));
    }
    let f: Vec<f64> = eta.iter().zip(a).map(|(e, a)| e * a).collect();
    Ok(simpson(&f, u.dx))
}

/// Shifts of the current time slab: Xᵢ per shock, Λᵢ per rarefaction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ShiftState {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl ShiftState {
    pub fn new(shocks: usize, rarefactions: usize) -> ShiftState {
        ShiftState { x: vec![0.0; shocks], lambda: vec![0.0; rarefactions] }
    }

    /// Restart every shift at zero after an interaction.
    pub fn reset(&mut self, shocks: usize, rarefactions: usize) {
        *self = ShiftState::new(shocks, rarefactions);
    }

    pub fn advance(&mut self, dt: f64, x_rates: &[f64], lambda_rates: &[f64]) -> Result<()> {
        if x_rates.len() != self.x.len() || lambda_rates.len() != self.lambda.len() {
            return Err(Error::Shape("shift rate count does not match the shift state".into()));
        }
        for (x, r) in self.x.iter_mut().zip(x_rates) {
            *x += dt * r;
        }
        for (l, r) in self.lambda.iter_mut().zip(lambda_rates) {
            *l += dt * r;
        }
        Ok(())
    }
}

/// Outcome of the weight-decay check at one interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightDecayReport {
    /// max over x of ΔL̄ + κΔQ̄ + ΔΩ(x); must be negative.
    pub worst_margin: f64,
    pub worst_x: f64,
    /// Smallest κ that makes the margin negative everywhere.
    pub kappa_needed: f64,
    /// max over x of δ*·(a(x, t+) - a(x, t-)) with exact shock integrals.
    pub raw_jump: f64,
    /// max |Ω - exact integral| over both sides.
    pub tail_error: f64,
    pub points: usize,
    pub pass: bool,
}

struct Zone {
    profile: Option<Profile>,
    centre: f64,
    half: f64,
}

impl Zone {
    /// (discretized, exact) contribution -(p(ṽ(x)) - p₋) of a shock.
    fn omega(&self, x: f64) -> (f64, f64) {
        let Some(p) = &self.profile else { return (0.0, 0.0) };
        let law = p.law();
        let pl = law.p(p.left.v);
        let exact = -(law.p(p.state(x).v) - pl);
        let disc = if x < self.centre - self.half {
            0.0
        } else if x > self.centre + self.half {
            -(law.p(p.right.v) - pl)
        } else {
            exact
        };
        (disc, exact)
    }
}

fn zones(fronts: &[crate::fronttrack::Front], params: &SchedulerParams) -> Result<Vec<Zone>> {
    let rho = params.rho();
    fronts
        .iter()
        .map(|f| {
            let half = if f.wave.kind == WaveKind::PseudoShock { rho.sqrt() } else { params.nu.sqrt() };
            let profile = if f.wave.kind == WaveKind::Shock { Some(profile_of_front(f, params.nu, rho, &params.law)?) } else { None };
            Ok(Zone { profile, centre: f.centre(), half })
        })
        .collect()
}

/// Checks ΔL̄ + κΔQ̄ + ΔΩ(x) < 0 on 64 points per transition zone of the
/// incoming and outgoing waves, Ω being the plateau discretization of the
/// running integral of Σ_shocks ∂ₓ(-p(ṽᵢ)).
pub fn weight_decay_check(ev: &InteractionEvent, params: &SchedulerParams, kappa: f64) -> Result<WeightDecayReport> {
    let before = zones(&ev.incoming, params)?;
    let after = zones(&ev.outgoing, params)?;
    let mut xs = Vec::new();
    for z in before.iter().chain(&after) {
        let lo = z.centre - z.half;
        for k in 0..=64 {
            xs.push(lo + 2.0 * z.half * k as f64 / 64.0);
        }
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    xs.push(lo - 1.0);
    xs.push(hi + 1.0);
    xs.sort_by(f64::total_cmp);
    let dl = ev.after.lbar - ev.before.lbar;
    let dq = ev.after.qbar - ev.before.qbar;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_x = 0.0;
    let mut raw = f64::NEG_INFINITY;
    let mut tail: f64 = 0.0;
    let mut need: f64 = 0.0;
    for &x in &xs {
        let mut d_disc = 0.0;
        let mut d_exact = 0.0;
        for (zs, sign) in [(&after, 1.0), (&before, -1.0)] {
            for z in zs {
                let (a, b) = z.omega(x);
                d_disc += sign * a;
                d_exact += sign * b;
                tail = tail.max((a - b).abs());
            }
        }
        let m = dl + kappa * dq + d_disc;
        if m > worst {
            worst = m;
            worst_x = x;
        }
        raw = raw.max(dl + kappa * dq + d_exact);
        let free = dl + d_disc;
        if free >= 0.0 {
            need = need.max(if dq < 0.0 { free / -dq } else { f64::INFINITY });
        }
    }
    let pass = worst < 0.0 && raw <= (-1.0 / params.nu.sqrt()).exp();
    Ok(WeightDecayReport { worst_margin: worst, worst_x, kappa_needed: need, raw_jump: raw, tail_error: tail, points: xs.len(), pass })
}
