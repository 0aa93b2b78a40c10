//! Explicit finite-difference solver for the 1D Navier–Stokes system in
//! BD variables,
//!
//!   v_t - h_x = -ν(μ(v) v^γ p(v)_x)_x,   h_t + p(v)_x = 0,
//!
//! on a uniform mass grid with far-field cells held fixed, plus energy
//! diagnostics and the inviscid-limit harness.

use crate::contraction::{build_weights, g_functional, weight_base, weighted_entropy, UniformField};
use crate::error::{Error, Result};
use crate::fronttrack::{accurate_solver, init_approximation, Configuration, Front, SchedulerParams, StepData};
use crate::numerics::{gradient, simpson, trapezoid};
use crate::profiles::{profiles_of, Profile};
use crate::thermo::{GasLaw, LagrangianState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsParams {
    pub law: GasLaw,
    pub nu: f64,
    /// Mesh width as a multiple of ν.
    pub mesh: f64,
    /// Hyperbolic limit max|λ| dt ≤ cfl·dx.
    pub cfl: f64,
    /// Parabolic limit ν·max(γμ/v)·dt ≤ diffusion_cfl·dx².
    pub diffusion_cfl: f64,
    /// Steps between diagnostic samples.
    pub sample_every: usize,
}

impl NsParams {
    pub fn new(law: GasLaw, nu: f64) -> Result<NsParams> {
        let p = NsParams { law, nu, mesh: 0.125, cfl: 0.4, diffusion_cfl: 0.4, sample_every: 10 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !(self.mesh > 0.0) {
            return Err(Error::Config(format!("need nu > 0 and mesh > 0 (nu = {}, mesh = {})", self.nu, self.mesh)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) || !(self.diffusion_cfl > 0.0 && self.diffusion_cfl <= 0.5) {
            return Err(Error::Config("need 0 < cfl <= 1 and 0 < diffusion_cfl <= 0.5".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be positive".into()));
        }
        self.law.validate()
    }

    pub fn dx(&self) -> f64 {
        self.mesh * self.nu
    }
}

/// How the two end cells are held.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// Constant far-field states.
    Constant,
    /// Values of a travelling profile moving at its own speed.
    Travelling(Box<Profile>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub x0: f64,
    pub dx: f64,
    pub v: Vec<f64>,
    pub h: Vec<f64>,
    pub nu: f64,
    pub time: f64,
    pub boundary: Boundary,
}

#[inline]
fn pw(v: f64, e: f64) -> f64 {
    if e == 1.0 {
        v
    } else if e == 2.0 {
        v * v
    } else if e == -1.0 {
        1.0 / v
    } else if e == -2.0 {
        1.0 / (v * v)
    } else {
        v.powf(e)
    }
}

impl GridField {
    pub fn new(x0: f64, dx: f64, v: Vec<f64>, h: Vec<f64>, nu: f64) -> Result<GridField> {
        let f = UniformField::new(x0, dx, v, h)?;
        if !(nu > 0.0) {
            return Err(Error::Domain(format!("viscosity must be positive, got {nu}")));
        }
        Ok(GridField { x0, dx, v: f.v, h: f.h, nu, time: 0.0, boundary: Boundary::Constant })
    }

    /// Samples of a function of x on [lo, hi] with step dx.
    pub fn sample(lo: f64, hi: f64, dx: f64, nu: f64, f: impl Fn(f64) -> LagrangianState) -> Result<GridField> {
        let n = ((hi - lo) / dx).round() as usize + 1;
        let (v, h): (Vec<f64>, Vec<f64>) = (0..n).map(|k| f(lo + k as f64 * dx)).map(|s| (s.v, s.h)).unzip();
        GridField::new(lo, dx, v, h, nu)
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

    pub fn uniform(&self) -> UniformField {
        UniformField { x0: self.x0, dx: self.dx, v: self.v.clone(), h: self.h.clone() }
    }

    /// u = h - ν μ(v) v^γ p(v)_x.
    pub fn velocity(&self, law: &GasLaw) -> Vec<f64> {
        let p: Vec<f64> = self.v.iter().map(|&v| pw(v, -law.gamma)).collect();
        let px = gradient(&p, self.dx);
        (0..self.len()).map(|k| self.h[k] - self.nu * law.mu(self.v[k]) / p[k] * px[k]).collect()
    }

    fn pin(&mut self) {
        if let Boundary::Travelling(p) = &self.boundary {
            let n = self.len();
            for k in [0, n - 1] {
                let s = p.state(self.x(k) - p.speed * self.time);
                self.v[k] = s.v;
                self.h[k] = s.h;
            }
        }
    }
}

/// Largest stable step for the current state.
pub fn stable_dt(f: &GridField, params: &NsParams) -> f64 {
    let law = &params.law;
    // Both limits are decreasing in v.
    let vmin = f.v.iter().copied().fold(f64::INFINITY, f64::min);
    let c = law.c(vmin);
    let a = law.gamma * law.mu(vmin) / vmin;
    (params.cfl * f.dx / c).min(params.diffusion_cfl * f.dx * f.dx / (f.nu * a))
}

#[allow(clippy::too_many_arguments)]
fn rhs(v: &[f64], h: &[f64], dx: f64, nu: f64, law: &GasLaw, dv: &mut [f64], dh: &mut [f64], p: &mut [f64], flux: &mut [f64]) {
    let n = v.len();
    let g = law.gamma;
    let al = law.alpha;
    for k in 0..n {
        p[k] = pw(v[k], -g);
    }
    for k in 0..n - 1 {
        let vm = 0.5 * (v[k] + v[k + 1]);
        let mu = 1.0 + pw(vm, -al);
        flux[k] = mu * pw(vm, g) * (p[k + 1] - p[k]) / dx;
    }
    let inv2 = 0.5 / dx;
    dv[0] = 0.0;
    dh[0] = 0.0;
    dv[n - 1] = 0.0;
    dh[n - 1] = 0.0;
    for k in 1..n - 1 {
        dv[k] = (h[k + 1] - h[k - 1]) * inv2 - nu * (flux[k] - flux[k - 1]) / dx;
        dh[k] = -(p[k + 1] - p[k - 1]) * inv2;
    }
}

/// Scratch arrays reused across steps.
#[derive(Debug, Default)]
pub struct Workspace {
    dv: Vec<f64>,
    dh: Vec<f64>,
    v1: Vec<f64>,
    h1: Vec<f64>,
    p: Vec<f64>,
    flux: Vec<f64>,
    nv: Vec<f64>,
    nh: Vec<f64>,
}

impl Workspace {
    fn fit(&mut self, n: usize) {
        for a in [&mut self.dv, &mut self.dh, &mut self.v1, &mut self.h1, &mut self.p, &mut self.flux, &mut self.nv, &mut self.nh] {
            a.resize(n, 0.0);
        }
    }
}

fn heun(f: &mut GridField, dt: f64, law: &GasLaw, ws: &mut Workspace) -> bool {
    let n = f.len();
    ws.fit(n);
    rhs(&f.v, &f.h, f.dx, f.nu, law, &mut ws.dv, &mut ws.dh, &mut ws.p, &mut ws.flux);
    for k in 0..n {
        ws.v1[k] = f.v[k] + dt * ws.dv[k];
        ws.h1[k] = f.h[k] + dt * ws.dh[k];
    }
    if ws.v1.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return false;
    }
    let (v1, h1) = (std::mem::take(&mut ws.v1), std::mem::take(&mut ws.h1));
    rhs(&v1, &h1, f.dx, f.nu, law, &mut ws.dv, &mut ws.dh, &mut ws.p, &mut ws.flux);
    let mut ok = true;
    for k in 0..n {
        let a = 0.5 * (f.v[k] + v1[k] + dt * ws.dv[k]);
        let b = 0.5 * (f.h[k] + h1[k] + dt * ws.dh[k]);
        ok &= a > 0.0 && a.is_finite() && b.is_finite();
        ws.nv[k] = a;
        ws.nh[k] = b;
    }
    ws.v1 = v1;
    ws.h1 = h1;
    if ok {
        std::mem::swap(&mut f.v, &mut ws.nv);
        std::mem::swap(&mut f.h, &mut ws.nh);
        f.time += dt;
        f.pin();
    }
    ok
}

/// Advances by `dt`, halving the step when v would lose positivity.
pub fn step(f: &mut GridField, dt: f64, law: &GasLaw, ws: &mut Workspace) -> Result<u32> {
    let mut sub = dt;
    let mut level = 0;
    let target = f.time + dt;
    while f.time < target - 1e-15 * target.abs().max(1.0) {
        let h = sub.min(target - f.time);
        if heun(f, h, law, ws) {
            continue;
        }
        level += 1;
        if level > MAX_HALVINGS {
            let k = f.v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap_or(0);
            return Err(Error::Stability {
                time: f.time,
                detail: format!("positivity lost after {MAX_HALVINGS} halvings; min v = {:e} at x = {}, h = {}", f.v[k], f.x(k), f.h[k]),
            });
        }
        sub *= 0.5;
    }
    Ok(level)
}

/// Sampled energy quantities of one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub times: Vec<f64>,
    /// ∫η((v,h)|U*) with U* the far-left state.
    pub entropy_bd: Vec<f64>,
    /// ν∫μ v^γ |p(v)_x|².
    pub dissipation_bd: Vec<f64>,
    /// ∫(u - u*)²/2 + Q(v|v*).
    pub energy: Vec<f64>,
    /// ν∫(γμ(v)/v)|u_x|².
    pub dissipation: Vec<f64>,
    /// ∫|h - u|² = ν²∫|μ v^γ p_x|².
    pub bd_quantity: Vec<f64>,
    /// Net outflow of the entropy fluxes through the ends.
    pub flux_bd: Vec<f64>,
    pub flux_u: Vec<f64>,
    pub steps: usize,
    pub halvings: u32,
    /// (v*, h*, u*), the far-left values at the first sample.
    pub reference: Option<[f64; 3]>,
}

impl RunDiagnostics {
    fn defect(&self, e: &[f64], d: &[f64], fl: &[f64]) -> Vec<f64> {
        let rate: Vec<f64> = d.iter().zip(fl).map(|(a, b)| a + b).collect();
        let mut out = Vec::with_capacity(e.len());
        for k in 0..e.len() {
            out.push(e[k] - e[0] + trapezoid(&self.times[..=k], &rate[..=k]));
        }
        out
    }

    /// E(t) - E(0) + ∫(D + boundary flux) for the BD entropy.
    pub fn defect_bd(&self) -> Vec<f64> {
        self.defect(&self.entropy_bd, &self.dissipation_bd, &self.flux_bd)
    }

    /// Same balance for the kinetic-plus-internal energy.
    pub fn defect_energy(&self) -> Vec<f64> {
        self.defect(&self.energy, &self.dissipation, &self.flux_u)
    }

    pub fn max_abs_defect(&self) -> f64 {
        self.defect_bd().iter().chain(self.defect_energy().iter()).fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Largest positive defect, i.e. the worst violation of the inequality.
    pub fn max_excess(&self) -> f64 {
        self.defect_bd().iter().chain(self.defect_energy().iter()).fold(0.0, |m: f64, &d| m.max(d))
    }
}

fn sample_diagnostics(f: &GridField, law: &GasLaw, d: &mut RunDiagnostics) {
    let n = f.len();
    let u = f.velocity(law);
    let [vs, hs, ustar] = *d.reference.get_or_insert([f.v[0], f.h[0], u[0]]);
    let star = LagrangianState { v: vs, h: hs };
    let p: Vec<f64> = f.v.iter().map(|&v| pw(v, -law.gamma)).collect();
    let px = gradient(&p, f.dx);
    let ux = gradient(&u, f.dx);
    let pstar = law.p(star.v);
    let mut eb = vec![0.0; n];
    let mut db = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut du = vec![0.0; n];
    let mut bd = vec![0.0; n];
    for k in 0..n {
        let v = f.v[k];
        let q = law.rel_q(v, star.v);
        eb[k] = 0.5 * (f.h[k] - star.h).powi(2) + q;
        e[k] = 0.5 * (u[k] - ustar).powi(2) + q;
        let mu = law.mu(v);
        db[k] = f.nu * mu / p[k] * px[k] * px[k];
        du[k] = f.nu * law.gamma * mu / v * ux[k] * ux[k];
        bd[k] = (f.h[k] - u[k]).powi(2);
    }
    d.times.push(f.time);
    d.entropy_bd.push(simpson(&eb, f.dx));
    d.dissipation_bd.push(simpson(&db, f.dx));
    d.energy.push(simpson(&e, f.dx));
    d.dissipation.push(simpson(&du, f.dx));
    d.bd_quantity.push(simpson(&bd, f.dx));
    let end = n - 1;
    let fb = |k: usize| (p[k] - pstar) * (f.h[k] - star.h - f.nu * law.mu(f.v[k]) / p[k] * px[k]);
    let fu = |k: usize| (u[k] - ustar) * (p[k] - pstar - f.nu * law.gamma * law.mu(f.v[k]) / f.v[k] * ux[k]);
    d.flux_bd.push(fb(end) - fb(0));
    d.flux_u.push(fu(end) - fu(0));
}

/// Runs to `t_end`, sampling diagnostics every `sample_every` steps and
/// calling `observer(field, dt)` after every step.
pub fn run<F>(f: &mut GridField, t_end: f64, params: &NsParams, mut observer: F) -> Result<RunDiagnostics>
where
    F: FnMut(&GridField, f64) -> Result<()>,
{
    let law = &params.law;
    let mut diag = RunDiagnostics::default();
    let mut ws = Workspace::default();
    f.pin();
    sample_diagnostics(f, law, &mut diag);
    let mut k = 0;
    while f.time < t_end - 1e-14 * t_end.max(1.0) {
        let dt = stable_dt(f, params).min(t_end - f.time);
        diag.halvings += step(f, dt, law, &mut ws)?;
        k += 1;
        observer(f, dt)?;
        if k % params.sample_every == 0 || f.time >= t_end - 1e-14 * t_end.max(1.0) {
            sample_diagnostics(f, law, &mut diag);
        }
    }
    diag.steps = k;
    Ok(diag)
}

/// Smooth bump ψ(s) ∝ exp(-1/(1-s²)) on (-1, 1), unit mass.
fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp() / BUMP_MASS
    }
}

const BUMP_MASS: f64 = 0.443_993_816_168_079_4;

fn bump_table() -> &'static Vec<f64> {
    static TABLE: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let m = 8192;
        let ds = 2.0 / m as f64;
        let s: Vec<f64> = (0..=m).map(|k| -1.0 + k as f64 * ds).collect();
        let f: Vec<f64> = s.iter().map(|&s| bump(s)).collect();
        crate::thermo::cumulative_integral(&s, &f)
    })
}

/// ∫_{-1}^{s} ψ.
fn bump_cdf(s: f64) -> f64 {
    if s <= -1.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let t = bump_table();
    let m = t.len() - 1;
    let pos = (s + 1.0) / 2.0 * m as f64;
    let i = (pos.floor() as usize).min(m - 1);
    let w = pos - i as f64;
    // Hermite with the exact density as slope.
    let ds = 2.0 / m as f64;
    let (s0, s1) = (-1.0 + i as f64 * ds, -1.0 + (i + 1) as f64 * ds);
    let (f0, f1) = (t[i], t[i + 1]);
    let (d0, d1) = (bump(s0) * ds, bump(s1) * ds);
    let w2 = w * w;
    let w3 = w2 * w;
    ((2.0 * w3 - 3.0 * w2 + 1.0) * f0 + (w3 - 2.0 * w2 + w) * d0 + (-2.0 * w3 + 3.0 * w2) * f1 + (w3 - w2) * d1).clamp(0.0, 1.0)
}

/// Distances between the mollified and the raw data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifyReport {
    pub l1_distance: f64,
    pub entropy_distance: f64,
    pub bd_quantity: f64,
}

/// Step data convolved with a bump of half-width √ν in (v, u), with h then
/// set to u - ν μ v^γ p_x, on [lo, hi] with step dx.
pub fn mollify_initial(data: &StepData, nu: f64, lo: f64, hi: f64, dx: f64, law: &GasLaw) -> Result<(GridField, MollifyReport)> {
    data.validate()?;
    let w = nu.sqrt();
    let raw = |x: f64| data.states[data.jumps.partition_point(|&j| j <= x)];
    let n = ((hi - lo) / dx).round() as usize + 1;
    let mut v = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut vx = Vec::with_capacity(n);
    for k in 0..n {
        let x = lo + k as f64 * dx;
        let mut s = data.states[0];
        let mut d = 0.0;
        for (j, &xj) in data.jumps.iter().enumerate() {
            let c = bump_cdf((x - xj) / w);
            let jump_v = data.states[j + 1].v - data.states[j].v;
            s.v += jump_v * c;
            s.h += (data.states[j + 1].h - data.states[j].h) * c;
            d += jump_v * bump((x - xj) / w) / w;
        }
        if !(s.v > 0.0) {
            return Err(Error::Vacuum(format!("mollified data has v = {} at {x}", s.v)));
        }
        v.push(s.v);
        u.push(s.h);
        vx.push(d);
    }
    let h: Vec<f64> = (0..n).map(|k| u[k] + nu * law.gamma * law.mu(v[k]) / v[k] * vx[k]).collect();
    let mut l1 = vec![0.0; n];
    let mut ent = vec![0.0; n];
    let mut bd = vec![0.0; n];
    for k in 0..n {
        let r = raw(lo + k as f64 * dx);
        l1[k] = (v[k] - r.v).abs() + (u[k] - r.h).abs();
        ent[k] = 0.5 * (u[k] - r.h).powi(2) + law.rel_q(v[k], r.v);
        bd[k] = (h[k] - u[k]).powi(2);
    }
    let field = GridField::new(lo, dx, v, h, nu)?;
    Ok((field, MollifyReport { l1_distance: simpson(&l1, dx), entropy_distance: simpson(&ent, dx), bd_quantity: simpson(&bd, dx) }))
}

/// Fastest characteristic speed among the data states, with margin.
pub fn max_speed(data: &StepData, law: &GasLaw) -> f64 {
    data.states.iter().map(|s| law.c(s.v)).fold(0.0, f64::max) * 1.2
}

/// Front-tracking Euler solution of the data. A single jump is replaced by
/// its partitioned fan centred at the jump; several jumps go through the
/// interaction loop.
pub fn euler_reference(data: &StepData, params: &SchedulerParams) -> Result<Configuration> {
    data.validate()?;
    if data.jumps.len() != 1 {
        return init_approximation(data, params);
    }
    let mut cfg = Configuration::constant(data.states[0]);
    for w in accurate_solver(data.states[0], data.states[1], &[], params)? {
        cfg.fronts.push(Front { id: cfg.next_id, wave: w, position: data.jumps[0], birth_time: 0.0, generation: 1, switched: false, viscous_offset: 0.0 });
        cfg.next_id += 1;
    }
    Ok(cfg)
}

/// Configuration of the Euler reference at time t.
pub fn euler_at(data: &StepData, reference: &Configuration, t: f64, params: &SchedulerParams) -> Result<Configuration> {
    if data.jumps.len() == 1 {
        let mut c = reference.clone();
        c.advance(t - c.time);
        return Ok(c);
    }
    let out = crate::fronttrack::evolve(reference.clone(), t, params, |_, _| Ok(()));
    if let Some(e) = out.error {
        return Err(e);
    }
    let mut c = out.config;
    let dt = t - c.time;
    if dt > 0.0 {
        c.advance(dt);
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSetup {
    pub law: GasLaw,
    pub delta: f64,
    pub eps: f64,
    pub kappa: f64,
    pub mesh: f64,
    pub t_end: f64,
    /// Window [a, b] for the L¹ distance.
    pub window: (f64, f64),
    /// Number of F/G samples in time, endpoints included.
    pub samples: usize,
}

/// One row of the inviscid-limit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub nu: f64,
    pub l1_distance: f64,
    pub sup_f: f64,
    pub int_g: f64,
    pub energy_excess: f64,
    pub steps: usize,
    pub error: Option<String>,
}

impl LimitRow {
    pub const HEADER: &'static str = "nu,l1_distance,sup_f,int_g,energy_excess,steps,error";

    pub fn to_record(&self) -> String {
        format!(
            "{:e},{:.12e},{:.12e},{:.12e},{:.6e},{},{}",
            self.nu,
            self.l1_distance,
            self.sup_f,
            self.int_g,
            self.energy_excess,
            self.steps,
            self.error.as_deref().unwrap_or("")
        )
    }
}

/// F_ν and G_ν of a grid field against the dressed Euler configuration.
pub fn compare_with_dressing(f: &GridField, config: &Configuration, setup: &LimitSetup, nu: f64) -> Result<(f64, f64)> {
    let rho = nu.cbrt();
    let profiles = profiles_of(config, nu, rho, &setup.law)?;
    let ub = UniformField::from_profiles(config, &profiles, f.x0, f.dx, f.len())?;
    let u = f.uniform();
    let ds = setup.eps.sqrt();
    let w = build_weights(&ub, &profiles, weight_base(config, setup.kappa, &setup.law), ds)?;
    let fv = weighted_entropy(&u, &ub, &w.a, &setup.law)?;
    let g = g_functional(&u, &ub, &profiles, nu, &setup.law)?;
    Ok((fv, g.total()))
}

fn limit_row(data: &StepData, nu: f64, setup: &LimitSetup) -> Result<LimitRow> {
    let law = &setup.law;
    let mut np = NsParams::new(*law, nu)?;
    np.mesh = setup.mesh;
    let span = 3.0 + max_speed(data, law) * setup.t_end;
    let lo = data.jumps[0] - span;
    let hi = data.jumps[data.jumps.len() - 1] + span;
    let (mut field, _) = mollify_initial(data, nu, lo, hi, np.dx(), law)?;
    let sp = SchedulerParams::new(*law, nu, setup.delta, setup.eps)?;
    let reference = euler_reference(data, &sp)?;
    let samples = setup.samples.max(2);
    let times: Vec<f64> = (0..samples).map(|k| setup.t_end * k as f64 / (samples - 1) as f64).collect();
    let mut fs = Vec::with_capacity(samples);
    let mut gs = Vec::with_capacity(samples);
    let c0 = euler_at(data, &reference, 0.0, &sp)?;
    let (f0, g0) = compare_with_dressing(&field, &c0, setup, nu)?;
    fs.push(f0);
    gs.push(g0);
    let mut next = 1;
    let mut pending: Vec<(usize, GridField)> = Vec::new();
    let diag = run(&mut field, setup.t_end, &np, |f, _| {
        while next < samples && f.time >= times[next] - 1e-12 {
            pending.push((next, f.clone()));
            next += 1;
        }
        Ok(())
    })?;
    let mut used_times = vec![0.0];
    for (_, snap) in pending {
        let c = euler_at(data, &reference, snap.time, &sp)?;
        let (fv, gv) = compare_with_dressing(&snap, &c, setup, nu)?;
        fs.push(fv);
        gs.push(gv);
        used_times.push(snap.time);
    }
    let cend = euler_at(data, &reference, field.time, &sp)?;
    let (a, b) = setup.window;
    let l1: Vec<f64> = (0..field.len())
        .map(|k| {
            let x = field.x(k);
            if x < a || x > b {
                return 0.0;
            }
            let s = cend.state_at(x);
            (field.v[k] - s.v).abs() + (field.h[k] - s.h).abs()
        })
        .collect();
    Ok(LimitRow {
        nu,
        l1_distance: simpson(&l1, field.dx),
        sup_f: fs.iter().copied().fold(0.0, f64::max),
        int_g: trapezoid(&used_times, &gs),
        energy_excess: diag.max_excess(),
        steps: diag.steps,
        error: None,
    })
}

/// Runs NS from mollified data for each ν (in parallel) and compares with
/// the dressed front-tracking solution. Rows keep the order of `nus`.
pub fn inviscid_limit_experiment(data: &StepData, nus: &[f64], setup: &LimitSetup) -> Vec<LimitRow> {
    nus.par_iter()
        .map(|&nu| {
            limit_row(data, nu, setup).unwrap_or_else(|e| {
                log::warn!("limit run at nu = {nu:e} failed: {e}");
                LimitRow { nu, l1_distance: f64::NAN, sup_f: f64::NAN, int_g: f64::NAN, energy_excess: f64::NAN, steps: 0, error: Some(e.to_string()) }
            })
        })
        .collect()
}

/// Reference scheme in (v, u): v_t = u_x, u_t + p(v)_x = ν(γμ(v)u_x/v)_x,
/// same grid, stepping and pinned ends as the BD scheme. Returns (v, u)
/// at `t_end`.
pub fn run_velocity_form(v0: &[f64], u0: &[f64], dx: f64, t_end: f64, params: &NsParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let law = &params.law;
    let nu = params.nu;
    let n = v0.len();
    if u0.len() != n || n < 3 {
        return Err(Error::Shape(format!("need matching arrays of length >= 3, got {} and {}", n, u0.len())));
    }
    let rate = |v: &[f64], u: &[f64], dv: &mut [f64], du: &mut [f64]| {
        let flux: Vec<f64> = (0..n - 1)
            .map(|k| {
                let vm = 0.5 * (v[k] + v[k + 1]);
                law.gamma * law.mu(vm) / vm * (u[k + 1] - u[k]) / dx
            })
            .collect();
        for k in 1..n - 1 {
            dv[k] = (u[k + 1] - u[k - 1]) / (2.0 * dx);
            du[k] = -(law.p(v[k + 1]) - law.p(v[k - 1])) / (2.0 * dx) + nu * (flux[k] - flux[k - 1]) / dx;
        }
    };
    let (mut v, mut u) = (v0.to_vec(), u0.to_vec());
    let (mut dv, mut du) = (vec![0.0; n], vec![0.0; n]);
    let (mut dv2, mut du2) = (vec![0.0; n], vec![0.0; n]);
    let mut t = 0.0;
    while t < t_end - 1e-14 * t_end.max(1.0) {
        let probe = GridField { x0: 0.0, dx, v: v.clone(), h: u.clone(), nu, time: t, boundary: Boundary::Constant };
        let dt = stable_dt(&probe, params).min(t_end - t);
        rate(&v, &u, &mut dv, &mut du);
        let v1: Vec<f64> = (0..n).map(|k| v[k] + dt * dv[k]).collect();
        let u1: Vec<f64> = (0..n).map(|k| u[k] + dt * du[k]).collect();
        rate(&v1, &u1, &mut dv2, &mut du2);
        for k in 1..n - 1 {
            v[k] += 0.5 * dt * (dv[k] + dv2[k]);
            u[k] += 0.5 * dt * (du[k] + du2[k]);
        }
        if let Some(k) = v.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Stability { time: t, detail: format!("v = {:e} at cell {k}", v[k]) });
        }
        t += dt;
    }
    Ok((v, u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockContractionSetup {
    pub law: GasLaw,
    /// Signed size of the backward shock.
    pub sigma: f64,
    pub nu: f64,
    /// L² norm of the Gaussian bump added to v.
    pub perturbation: f64,
    /// Width of the bump.
    pub bump_width: f64,
    pub mesh: f64,
    pub t_end: f64,
    /// Distance kept between the shock and either end of the grid.
    pub margin: f64,
    /// Time between samples of F.
    pub sample_dt: f64,
}

impl ShockContractionSetup {
    pub fn new(law: GasLaw) -> ShockContractionSetup {
        ShockContractionSetup { law, sigma: -0.1, nu: 1e-2, perturbation: 1e-2, bump_width: 0.1, mesh: 0.25, t_end: 1.0, margin: 4.0, sample_dt: 0.01 }
    }
}

/// F(t) = ∫a η(U|Ũ(· - X)) along a perturbed viscous shock.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContractionTrace {
    pub times: Vec<f64>,
    pub f: Vec<f64>,
    pub shift: Vec<f64>,
    pub diagnostics: RunDiagnostics,
}

impl ContractionTrace {
    /// Total increase of F over the samples.
    pub fn defect(&self) -> f64 {
        self.f.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum()
    }

    /// Largest single increase of F between samples.
    pub fn worst_increase(&self) -> f64 {
        self.f.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

struct ShiftedShock<'a> {
    profile: &'a Profile,
    params: crate::contraction::ContractionParams,
}

impl ShiftedShock<'_> {
    /// (F, Ẋ) for the field against the profile centred at `centre`.
    fn evaluate(&self, f: &GridField, centre: f64) -> Result<(f64, f64)> {
        let law = self.profile.law();
        let p = [self.profile.clone().at(centre)];
        let u = f.uniform();
        let (v, h): (Vec<f64>, Vec<f64>) = (0..f.len()).map(|k| p[0].state(f.x(k))).map(|s| (s.v, s.h)).unzip();
        let ub = UniformField::new(f.x0, f.dx, v, h)?;
        let w = build_weights(&ub, &p, 0.0, self.params.delta_star)?;
        let fv = weighted_entropy(&u, &ub, &w.a, law)?;
        let y = crate::contraction::y_functional(&u, &ub, &w, 0, &p, law)?;
        let jb = crate::contraction::j_bad(&u, &ub, &w, &p, &self.params, law)?;
        let rate = crate::contraction::shock_shift_step(y, self.profile.size, self.profile.speed, jb, self.profile.family);
        Ok((fv, rate))
    }
}

/// Evolves a viscous shock plus a bump in v and tracks the weighted
/// relative entropy against the shifted profile. The shift is advanced
/// with explicit Euler at every solver step.
pub fn shock_contraction_run(setup: &ShockContractionSetup) -> Result<ContractionTrace> {
    let law = setup.law;
    let l = crate::scenario::reference_state();
    let rc = crate::riemann::wave_by_size(crate::thermo::to_riemann(l, &law)?, crate::riemann::Family::Backward, setup.sigma, &law)?;
    let r = crate::thermo::from_riemann(rc, &law)?;
    let profile = crate::profiles::viscous_shock_profile(l, r, crate::riemann::Family::Backward, setup.nu, &law)?;
    let mut np = NsParams::new(law, setup.nu)?;
    np.mesh = setup.mesh;
    let travel = profile.speed * setup.t_end;
    let lo = -setup.margin + travel.min(0.0);
    let hi = setup.margin + travel.max(0.0);
    let ell = setup.bump_width;
    let amp = setup.perturbation / (ell * (std::f64::consts::PI / 2.0).sqrt()).sqrt();
    let mut field = GridField::sample(lo, hi, np.dx(), setup.nu, |x| {
        let s = profile.state(x);
        LagrangianState { v: s.v + amp * (-(x / ell).powi(2)).exp(), h: s.h }
    })?;
    field.boundary = Boundary::Travelling(Box::new(profile.clone()));
    let sh = ShiftedShock { profile: &profile, params: crate::contraction::ContractionParams::new(setup.sigma.abs(), 1.0)? };
    let mut shift = 0.0;
    let (f0, mut rate) = sh.evaluate(&field, 0.0)?;
    let mut trace = ContractionTrace { times: vec![0.0], f: vec![f0], shift: vec![0.0], ..Default::default() };
    let mut next = setup.sample_dt;
    let diag = run(&mut field, setup.t_end, &np, |f, dt| {
        shift += rate * dt;
        let (fv, r) = sh.evaluate(f, profile.speed * f.time + shift)?;
        rate = r;
        if f.time >= next - 1e-12 || f.time >= setup.t_end - 1e-12 {
            trace.times.push(f.time);
            trace.f.push(fv);
            trace.shift.push(shift);
            next += setup.sample_dt;
        }
        Ok(())
    })?;
    trace.diagnostics = diag;
    Ok(trace)
}
