//! Event-driven front tracking: accurate, adjusted and simplified Riemann
//! solvers, zero-speed pseudo-shocks and distance-threshold scheduling.

use crate::error::{Error, Result};
use crate::glimm::{assign_generation, functionals, GlimmSnapshot};
use crate::riemann::{approaching, left_of_wave, solve_riemann, wave_by_size, Family, WaveDescriptor, WaveKind};
use crate::thermo::{from_riemann, to_riemann, GasLaw, LagrangianState, RiemannCoords};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt::Write as _;

/// Waves at or below this size are dropped from solver output.
const ZERO_WAVE: f64 = 1e-14;

/// Interaction distances d_0 = base, d_j = base − (2j−1)·decrement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSchedule {
    pub base: f64,
    pub decrement: f64,
}

impl ThresholdSchedule {
    /// base ρ^(1/4), decrement ρ^(1/3).
    pub fn cube_root(rho: f64) -> Self {
        ThresholdSchedule { base: rho.powf(0.25), decrement: rho.cbrt() }
    }

    /// base ρ^(1/4) with a decrement that keeps d_j above 2√ρ for j ≤ j_max.
    pub fn desk(rho: f64, j_max: usize) -> Self {
        let base = rho.powf(0.25);
        ThresholdSchedule { base, decrement: (base - 2.0 * rho.sqrt()) / (2.0 * j_max as f64 + 1.0) }
    }

    pub fn d(&self, j: usize) -> f64 {
        if j == 0 {
            self.base
        } else {
            self.base - (2.0 * j as f64 - 1.0) * self.decrement
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerParams {
    pub law: GasLaw,
    pub nu: f64,
    pub delta: f64,
    pub kappa: f64,
    pub eps: f64,
    pub schedule: ThresholdSchedule,
    pub max_events: usize,
    /// Largest shift a single front may receive when a fan is spread out.
    pub reposition_limit: f64,
}

impl SchedulerParams {
    /// Desk schedule with room for 10⁴ events.
    pub fn new(law: GasLaw, nu: f64, delta: f64, eps: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) || !(delta > 0.0 && delta < 1.0) || !(eps > 0.0) {
            return Err(Error::Config(format!("need 0 < nu, delta < 1 and eps > 0 (nu = {nu}, delta = {delta}, eps = {eps})")));
        }
        let rho = nu.cbrt();
        Ok(SchedulerParams {
            law,
            nu,
            delta,
            kappa: 1.0,
            eps,
            schedule: ThresholdSchedule::desk(rho, 10_000),
            max_events: 10_000,
            reposition_limit: 1.0,
        })
    }

    pub fn rho(&self) -> f64 {
        self.nu.cbrt()
    }

    /// Spacing floor 2√ρ below which the schedule is exhausted.
    pub fn floor(&self) -> f64 {
        2.0 * self.rho().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub id: u64,
    pub wave: WaveDescriptor,
    /// Position at the configuration's current time.
    pub position: f64,
    pub birth_time: f64,
    pub generation: u32,
    /// Reflected rarefaction counted as switched from an incoming shock.
    pub switched: bool,
    /// Offset of the viscous centre from the tracked position.
    pub viscous_offset: f64,
}

impl Front {
    pub fn centre(&self) -> f64 {
        self.position + self.viscous_offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub ambient: LagrangianState,
    pub fronts: Vec<Front>,
    pub time: f64,
    pub j: usize,
    pub next_id: u64,
}

impl Configuration {
    /// Constant state with no fronts.
    pub fn constant(state: LagrangianState) -> Self {
        Configuration { ambient: state, fronts: Vec::new(), time: 0.0, j: 0, next_id: 0 }
    }

    pub fn left_state(&self) -> LagrangianState {
        self.fronts.first().map(|f| f.wave.left).unwrap_or(self.ambient)
    }

    pub fn right_state(&self) -> LagrangianState {
        self.fronts.last().map(|f| f.wave.right).unwrap_or(self.ambient)
    }

    /// State at mass coordinate `y` (right-continuous).
    pub fn state_at(&self, y: f64) -> LagrangianState {
        let k = self.fronts.partition_point(|f| f.position <= y);
        if k == 0 {
            self.left_state()
        } else {
            self.fronts[k - 1].wave.right
        }
    }

    pub fn advance(&mut self, dt: f64) {
        for f in &mut self.fronts {
            f.position += f.wave.speed * dt;
        }
        self.time += dt;
    }

    /// Adjacent fronts share their constant state and are strictly ordered.
    pub fn check_chain(&self, law: &GasLaw) -> Result<()> {
        for (i, w) in self.fronts.windows(2).enumerate() {
            let a = to_riemann(w[0].wave.right, law)?;
            let b = to_riemann(w[1].wave.left, law)?;
            if a.dist(&b) > 1e-12 {
                return Err(Error::Consistency(format!("states differ by {:e} between fronts {i} and {}", a.dist(&b), i + 1)));
            }
            if !(w[1].position > w[0].position) {
                return Err(Error::Consistency(format!("fronts {i} and {} out of order", i + 1)));
            }
        }
        Ok(())
    }

    /// Columns: position, family, kind, sigma, v_l, h_l, v_r, h_r, id, generation.
    pub fn to_columns(&self) -> String {
        let mut s = String::from("position,family,kind,sigma,v_l,h_l,v_r,h_r,id,generation\n");
        for f in &self.fronts {
            let w = &f.wave;
            let _ = writeln!(
                s,
                "{:.12e},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{}",
                f.position,
                w.family.label(),
                w.kind.label(),
                w.size,
                w.left.v,
                w.left.h,
                w.right.v,
                w.right.h,
                f.id,
                f.generation
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverTag {
    Accurate,
    Adjusted,
    /// Shock–shock overtaking, reflected rarefaction replaced by a pseudo-shock.
    SimplifiedSS,
    SimplifiedSR,
    SimplifiedRS,
    /// Physical rarefaction meeting a pseudo-shock.
    SimplifiedNpR,
    SimplifiedNpS,
}

impl SolverTag {
    pub fn label(self) -> &'static str {
        match self {
            SolverTag::Accurate => "accurate",
            SolverTag::Adjusted => "adjusted",
            SolverTag::SimplifiedSS => "iii-1",
            SolverTag::SimplifiedSR => "iii-2-SR",
            SolverTag::SimplifiedRS => "iii-2-RS",
            SolverTag::SimplifiedNpR => "iii-3-R",
            SolverTag::SimplifiedNpS => "iii-3-S",
        }
    }

    pub fn is_simplified(self) -> bool {
        !matches!(self, SolverTag::Accurate | SolverTag::Adjusted)
    }
}

fn rc(u: LagrangianState, law: &GasLaw) -> Result<RiemannCoords> {
    to_riemann(u, law)
}

fn lag(c: RiemannCoords, law: &GasLaw) -> Result<LagrangianState> {
    from_riemann(c, law)
}

fn mirror_state(u: LagrangianState) -> LagrangianState {
    LagrangianState { v: u.v, h: -u.h }
}

fn mirror_wave(w: &WaveDescriptor) -> WaveDescriptor {
    WaveDescriptor {
        family: w.family.other(),
        kind: w.kind,
        size: w.size,
        left: mirror_state(w.right),
        right: mirror_state(w.left),
        speed: -w.speed,
    }
}

fn mirror_waves(ws: Vec<WaveDescriptor>) -> Vec<WaveDescriptor> {
    ws.iter().rev().map(mirror_wave).collect()
}

/// Chain of outgoing waves; trivial segments merge into a neighbour.
#[derive(Default)]
struct Chain {
    out: Vec<WaveDescriptor>,
    pending: Option<LagrangianState>,
}

fn make_wave(family: Family, l: LagrangianState, r: LagrangianState, law: &GasLaw) -> Result<WaveDescriptor> {
    match family {
        Family::Pseudo => Ok(WaveDescriptor::pseudo(l, r, law)),
        f => WaveDescriptor::physical(f, l, r, law),
    }
}

impl Chain {
    fn push(&mut self, family: Family, l: LagrangianState, r: LagrangianState, law: &GasLaw) -> Result<()> {
        let l = self.pending.take().unwrap_or(l);
        let trivial = l == r || make_wave(Family::Pseudo, l, r, law)?.strength() <= ZERO_WAVE;
        if !trivial {
            self.out.push(make_wave(family, l, r, law)?);
        } else if let Some(last) = self.out.pop() {
            self.out.push(make_wave(last.family, last.left, r, law)?);
        } else {
            self.pending = Some(l);
        }
        Ok(())
    }
}

/// Splits a rarefaction into ⌈σ/δ⌉ fronts of equal size.
pub fn partition_rarefaction(w: &WaveDescriptor, delta: f64, law: &GasLaw) -> Result<Vec<WaveDescriptor>> {
    if w.kind != WaveKind::Rarefaction {
        return Ok(vec![*w]);
    }
    let q = ((w.size / delta - 1e-9).ceil() as usize).max(1);
    if q == 1 {
        return Ok(vec![*w]);
    }
    let base = rc(w.left, law)?;
    let step = w.size / q as f64;
    let mut states = vec![w.left];
    for l in 1..q {
        let c = match w.family {
            Family::Backward => RiemannCoords { r: base.r + l as f64 * step, s: base.s },
            _ => RiemannCoords { r: base.r, s: base.s + l as f64 * step },
        };
        states.push(lag(c, law)?);
    }
    states.push(w.right);
    states.windows(2).map(|p| WaveDescriptor::physical(w.family, p[0], p[1], law)).collect()
}

/// Exact fan, rarefactions partitioned unless `keep_whole` names their family.
pub fn accurate_solver(ul: LagrangianState, ur: LagrangianState, keep_whole: &[Family], params: &SchedulerParams) -> Result<Vec<WaveDescriptor>> {
    let law = &params.law;
    if ul == ur {
        return Ok(Vec::new());
    }
    let (bwd, fwd) = solve_riemann(ul, ur, law)?;
    let mut waves = Vec::new();
    match (bwd.strength() <= ZERO_WAVE, fwd.strength() <= ZERO_WAVE) {
        (true, true) => {}
        (true, false) => waves.push(WaveDescriptor::physical(Family::Forward, ul, ur, law)?),
        (false, true) => waves.push(WaveDescriptor::physical(Family::Backward, ul, ur, law)?),
        (false, false) => {
            waves.push(bwd);
            waves.push(fwd);
        }
    }
    let mut out = Vec::new();
    for w in waves {
        if keep_whole.contains(&w.family) {
            out.push(w);
        } else {
            out.extend(partition_rarefaction(&w, params.delta, law)?);
        }
    }
    Ok(out)
}

/// Solver choice for an approaching pair (left `a`, right `b`).
pub fn dispatch_solver(a: &WaveDescriptor, b: &WaveDescriptor, params: &SchedulerParams) -> Result<SolverTag> {
    if !approaching(a.family, b.family) {
        return Err(Error::Logic(format!("{}-wave and {}-wave are not approaching", a.family.label(), b.family.label())));
    }
    let rho = params.rho();
    let phys = |w: &WaveDescriptor| if w.kind == WaveKind::Shock { SolverTag::SimplifiedNpS } else { SolverTag::SimplifiedNpR };
    if a.family == Family::Pseudo {
        return Ok(phys(b));
    }
    if b.family == Family::Pseudo {
        return Ok(phys(a));
    }
    if a.family != b.family {
        return Ok(SolverTag::Accurate);
    }
    let (ws, wr) = solve_riemann(a.left, b.right, &params.law)?;
    let (same, reflected) = if a.family == Family::Backward { (ws, wr) } else { (wr, ws) };
    match (a.kind, b.kind) {
        (WaveKind::Shock, WaveKind::Shock) => {
            if reflected.kind == WaveKind::Rarefaction && reflected.size < rho {
                Ok(SolverTag::SimplifiedSS)
            } else {
                Ok(SolverTag::Accurate)
            }
        }
        (WaveKind::Rarefaction, WaveKind::Rarefaction) => Ok(SolverTag::Accurate),
        (ka, _) => {
            if (a.size * b.size).abs() <= rho {
                Ok(if ka == WaveKind::Shock { SolverTag::SimplifiedSR } else { SolverTag::SimplifiedRS })
            } else if same.strength() < rho || reflected.strength() < rho {
                Ok(SolverTag::Adjusted)
            } else {
                Ok(SolverTag::Accurate)
            }
        }
    }
}

/// Bisects between a point where `ok` fails and one where it holds and
/// returns a point where it holds.
fn settle<F: FnMut(f64) -> Result<bool>>(mut ok: F, mut bad: f64, mut good: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (bad + good);
        if mid == bad || mid == good {
            break;
        }
        if ok(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// Walks `good` away from `bad` by doubling steps until `ok` holds.
fn expand<F: FnMut(f64) -> Result<bool>>(ok: &mut F, bad: f64, first: f64) -> Result<f64> {
    let dir = (first - bad).signum();
    let mut step = (first - bad).abs().max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let x = bad + dir * step;
        if ok(x)? {
            return Ok(x);
        }
        step *= 2.0;
    }
    Err(Error::Numerical { what: "no admissible wave size found".into(), residual: step })
}

/// Overtaking shock–shock with a weak reflected rarefaction: the shock
/// carries the full r-jump, a pseudo-shock replaces the reflection.
fn simplified_ss_backward(l: LagrangianState, r: LagrangianState, law: &GasLaw) -> Result<Vec<WaveDescriptor>> {
    let lc = rc(l, law)?;
    let rc_ = rc(r, law)?;
    let mid = lag(wave_by_size(lc, Family::Backward, rc_.r - lc.r, law)?, law)?;
    let mut out = Chain::default();
    out.push(Family::Backward, l, mid, law)?;
    out.push(Family::Pseudo, mid, r, law)?;
    Ok(out.out)
}

/// Overtaking shock/rarefaction with small product: one backward wave from
/// L to the level h = h_R, a pseudo-shock of slope −1 to R.
fn simplified_sr_backward(l: LagrangianState, r: LagrangianState, rho: f64, law: &GasLaw) -> Result<Vec<WaveDescriptor>> {
    let lc = rc(l, law)?;
    let mut out = Chain::default();
    if r.h <= l.h {
        let h_at = |eta: f64| -> Result<f64> { Ok(wave_by_size(lc, Family::Backward, -eta, law)?.h()) };
        let eta = if r.h == l.h {
            0.0
        } else {
            let mut ok = |eta: f64| Ok(h_at(eta)? <= r.h);
            let good = expand(&mut ok, 0.0, 2.0 * (l.h - r.h))?;
            settle(ok, 0.0, good)?
        };
        let b = lag(wave_by_size(lc, Family::Backward, -eta.max(rho), law)?, law)?;
        out.push(Family::Backward, l, b, law)?;
        out.push(Family::Pseudo, b, r, law)?;
    } else {
        let mut b = RiemannCoords { r: 2.0 * r.h - lc.s, s: lc.s };
        while b.h() > r.h {
            b.r = b.r.next_down();
        }
        if b.r - lc.r >= rho {
            let mut bl = lag(b, law)?;
            bl.h = bl.h.min(r.h);
            out.push(Family::Backward, l, bl, law)?;
            out.push(Family::Pseudo, bl, r, law)?;
        } else {
            out.push(Family::Pseudo, l, r, law)?;
        }
    }
    Ok(out.out)
}

/// Forward wave L→a meeting a pseudo-shock a→R: the pseudo-shock moves to
/// the left, the forward wave keeps its size where h allows it.
fn simplified_np_after_forward(w: &WaveDescriptor, np: &WaveDescriptor, law: &GasLaw) -> Result<Vec<WaveDescriptor>> {
    let l = w.left;
    let r = np.right;
    let lc = rc(l, law)?;
    let ac = rc(w.right, law)?;
    let rc_ = rc(r, law)?;
    let b = if w.kind == WaveKind::Rarefaction {
        let mut b = RiemannCoords { r: rc_.r, s: lc.s + (rc_.s - ac.s) };
        while b.h() < l.h {
            b.s = b.s.next_up();
        }
        b
    } else {
        let at = |eta: f64| left_of_wave(rc_, Family::Forward, -eta, law);
        let eta0 = w.strength();
        let first = at(eta0)?;
        if first.h() >= l.h {
            first
        } else {
            let mut ok = |eta: f64| Ok(at(eta)?.h() >= l.h);
            let good = expand(&mut ok, eta0, eta0 + 2.0 * (l.h - first.h()))?;
            at(settle(ok, eta0, good)?)?
        }
    };
    let mut bl = lag(b, law)?;
    bl.h = bl.h.max(l.h);
    let mut out = Chain::default();
    out.push(Family::Pseudo, l, bl, law)?;
    out.push(Family::Forward, bl, r, law)?;
    Ok(out.out)
}

/// Overtaking shock/rarefaction with a large product but a weak accurate
/// outgoing wave: weak waves bumped to ρ, a pseudo-shock closes the gap.
fn adjusted_backward(w1: &WaveDescriptor, w2: &WaveDescriptor, params: &SchedulerParams) -> Result<Vec<WaveDescriptor>> {
    let law = &params.law;
    let rho = params.rho();
    let l = w1.left;
    let r = w2.right;
    let lc = rc(l, law)?;
    let rc_ = rc(r, law)?;
    let (bwd, fwd) = solve_riemann(l, r, law)?;
    let bump = |x: f64| if x.abs() >= rho { x } else if x > 0.0 { rho } else { -rho };
    let incoming_rar = if w1.kind == WaveKind::Rarefaction { w1.size } else { w2.size };
    let shock_case = bwd.size <= 0.0;
    let mut t1 = bump(bwd.size);
    if t1 > 0.0 {
        t1 = t1.min(incoming_rar.max(rho));
    }
    let mut t2 = bump(fwd.size);
    let b_at = |t: f64| wave_by_size(lc, Family::Backward, t, law);
    let c_at = |t: f64| left_of_wave(rc_, Family::Forward, t, law);
    let (hb, hc) = (b_at(t1)?.h(), c_at(t2)?.h());
    if hc < hb {
        if shock_case {
            let mut ok = |t: f64| Ok(b_at(t)?.h() <= hc);
            let good = expand(&mut ok, t1, t1 - 2.0 * (hb - hc))?;
            t1 = settle(ok, t1, good)?.min(-rho);
        } else {
            let mut ok = |t: f64| Ok(c_at(t)?.h() >= hb);
            let good = expand(&mut ok, t2, t2 - 2.0 * (hb - hc))?;
            t2 = settle(ok, t2, good)?;
            if t2.abs() < rho {
                t2 = -rho;
            }
        }
    }
    let b = lag(b_at(t1)?, law)?;
    let mut c = lag(c_at(t2)?, law)?;
    c.h = c.h.max(b.h);
    let mut out = Chain::default();
    out.push(Family::Backward, l, b, law)?;
    out.push(Family::Pseudo, b, c, law)?;
    out.push(Family::Forward, c, r, law)?;
    Ok(out.out)
}

/// Outgoing waves of the interaction between `a` (left) and `b` (right).
pub fn solve_interaction(tag: SolverTag, a: &WaveDescriptor, b: &WaveDescriptor, params: &SchedulerParams) -> Result<Vec<WaveDescriptor>> {
    let law = &params.law;
    if a.right != b.left {
        return Err(Error::Consistency("incoming waves do not share a state".into()));
    }
    // forward overtakings and pseudo-shock-left cases are mirror images
    let mirrored = match tag {
        SolverTag::SimplifiedNpR | SolverTag::SimplifiedNpS => a.family == Family::Pseudo,
        SolverTag::Accurate => false,
        _ => a.family == Family::Forward,
    };
    let (w1, w2) = if mirrored { (mirror_wave(b), mirror_wave(a)) } else { (*a, *b) };
    let out = match tag {
        SolverTag::Accurate => {
            let keep: Vec<Family> = [a.family, b.family].into_iter().filter(|f| *f != Family::Pseudo).collect();
            return accurate_solver(a.left, b.right, &keep, params);
        }
        SolverTag::Adjusted => {
            if w1.family != Family::Backward || w2.family != Family::Backward || w1.kind == w2.kind {
                return Err(Error::Logic("adjusted solver needs a shock/rarefaction overtaking".into()));
            }
            adjusted_backward(&w1, &w2, params)?
        }
        SolverTag::SimplifiedSS => {
            if w1.kind != WaveKind::Shock || w2.kind != WaveKind::Shock || w1.family != w2.family {
                return Err(Error::Logic("iii-1 needs two overtaking shocks".into()));
            }
            simplified_ss_backward(w1.left, w2.right, law)?
        }
        SolverTag::SimplifiedSR | SolverTag::SimplifiedRS => {
            if w1.family != w2.family || w1.kind == w2.kind || w1.family == Family::Pseudo {
                return Err(Error::Logic("iii-2 needs a shock/rarefaction overtaking".into()));
            }
            simplified_sr_backward(w1.left, w2.right, params.rho(), law)?
        }
        SolverTag::SimplifiedNpR | SolverTag::SimplifiedNpS => {
            let want = if tag == SolverTag::SimplifiedNpS { WaveKind::Shock } else { WaveKind::Rarefaction };
            if w1.family != Family::Forward || w2.family != Family::Pseudo || w1.kind != want {
                return Err(Error::Logic(format!("{} does not match the incoming pair", tag.label())));
            }
            simplified_np_after_forward(&w1, &w2, law)?
        }
    };
    Ok(if mirrored { mirror_waves(out) } else { out })
}

/// Piecewise-constant initial data: `states[k]` holds on (jumps[k-1], jumps[k]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepData {
    pub states: Vec<LagrangianState>,
    pub jumps: Vec<f64>,
}

impl StepData {
    pub fn validate(&self) -> Result<()> {
        if self.states.len() != self.jumps.len() + 1 {
            return Err(Error::Shape(format!("{} states for {} jumps", self.states.len(), self.jumps.len())));
        }
        if self.jumps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("jump positions must increase".into()));
        }
        if self.states.iter().any(|s| !(s.v > 0.0) || !s.h.is_finite()) {
            return Err(Error::Domain("states need v > 0 and finite h".into()));
        }
        Ok(())
    }
}

/// Replaces each jump by its accurate fan, spread over the time it takes
/// the fan to reach spacing d_0.
pub fn init_approximation(data: &StepData, params: &SchedulerParams) -> Result<Configuration> {
    data.validate()?;
    let rho = params.rho();
    let min_gap = rho.powf(0.2) / params.delta;
    if let Some(w) = data.jumps.windows(2).find(|w| w[1] - w[0] <= min_gap) {
        return Err(Error::Config(format!("jumps at {} and {} closer than {min_gap:.4}", w[0], w[1])));
    }
    let d0 = params.schedule.d(0);
    let mut cfg = Configuration::constant(data.states[0]);
    for (k, &x) in data.jumps.iter().enumerate() {
        let fan = accurate_solver(data.states[k], data.states[k + 1], &[], params)?;
        let gap = fan.windows(2).map(|w| w[1].speed - w[0].speed).fold(f64::INFINITY, f64::min);
        let tau = if fan.len() > 1 { d0 / gap } else { 0.0 };
        for w in fan {
            let id = cfg.next_id;
            cfg.next_id += 1;
            cfg.fronts.push(Front {
                id,
                wave: w,
                position: x + w.speed * tau,
                birth_time: 0.0,
                generation: 1,
                switched: false,
                viscous_offset: 0.0,
            });
        }
    }
    if let Some((i, w)) = cfg.fronts.windows(2).enumerate().find(|(_, w)| w[1].position - w[0].position < d0 * (1.0 - 1e-12)) {
        return Err(Error::Config(format!("fronts {i} and {} start {:e} apart, below d0 = {d0:e}", i + 1, w[1].position - w[0].position)));
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NextEvent {
    At { dt: f64, index: usize },
    Sentinel,
}

/// Earliest time at which an approaching, closing pair reaches d_{j+1}.
pub fn next_interaction(config: &Configuration, params: &SchedulerParams) -> Result<NextEvent> {
    let d = params.schedule.d(config.j + 1);
    let mut best: Option<(f64, usize)> = None;
    for (i, w) in config.fronts.windows(2).enumerate() {
        if !approaching(w[0].wave.family, w[1].wave.family) {
            continue;
        }
        let closing = w[0].wave.speed - w[1].wave.speed;
        if !(closing > 0.0) {
            continue;
        }
        let gap = w[1].position - w[0].position;
        let tau = ((gap - d) / closing).max(0.0);
        if best.is_none_or(|(t, _)| tau < t) {
            best = Some((tau, i));
        }
    }
    match best {
        None => Ok(NextEvent::Sentinel),
        Some(_) if d <= params.floor() => Err(Error::ScheduleExhausted { event: config.j + 1, d, floor: params.floor() }),
        Some((dt, index)) => Ok(NextEvent::At { dt, index }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    /// 1-based event counter j.
    pub index: usize,
    pub time: f64,
    /// Position of the left incoming front in the configuration.
    pub pair_index: usize,
    pub threshold: f64,
    pub tag: SolverTag,
    pub incoming: [Front; 2],
    pub outgoing: Vec<Front>,
    pub before: GlimmSnapshot,
    pub after: GlimmSnapshot,
    /// Total shift applied while spreading fronts apart.
    pub displacement: f64,
}

impl InteractionEvent {
    pub fn product(&self) -> f64 {
        (self.incoming[0].wave.size * self.incoming[1].wave.size).abs()
    }

    pub fn delta_l(&self) -> f64 {
        self.after.l - self.before.l
    }

    pub fn delta_q(&self) -> f64 {
        self.after.q - self.before.q
    }

    pub const HEADER: &'static str = "event,time,id_left,id_right,tag,sigma_left,sigma_right,sigma_out,dL,dQ,displacement";

    /// One line; outgoing sizes joined by ';'.
    pub fn to_record(&self) -> String {
        let outs: Vec<String> = self.outgoing.iter().map(|f| format!("{}{}:{:.6e}", f.wave.family.label(), f.wave.kind.label(), f.wave.size)).collect();
        format!(
            "{},{:.12e},{},{},{},{:.12e},{:.12e},{},{:.6e},{:.6e},{:.6e}",
            self.index,
            self.time,
            self.incoming[0].id,
            self.incoming[1].id,
            self.tag.label(),
            self.incoming[0].wave.size,
            self.incoming[1].wave.size,
            outs.join(";"),
            self.delta_l(),
            self.delta_q(),
            self.displacement
        )
    }
}

/// Resolves the pair (index, index+1) at the current time.
pub fn apply_interaction(config: &mut Configuration, index: usize, params: &SchedulerParams) -> Result<InteractionEvent> {
    let law = &params.law;
    if index + 1 >= config.fronts.len() {
        return Err(Error::Logic(format!("no front pair at {index}")));
    }
    let before = functionals(config, law);
    let a = config.fronts[index];
    let b = config.fronts[index + 1];
    let tag = dispatch_solver(&a.wave, &b.wave, params)?;
    let waves = solve_interaction(tag, &a.wave, &b.wave, params)?;
    let lineage = assign_generation(tag, &[a, b], &waves);
    let d = params.schedule.d(config.j + 1);
    let overtaking = a.wave.family == b.wave.family && a.wave.family != Family::Pseudo;
    let nu_shift = 2.0 * params.nu.sqrt();
    let mut outgoing = Vec::with_capacity(waves.len());
    for (k, (w, lin)) in waves.iter().zip(&lineage).enumerate() {
        let id = match lin.continues {
            Some(id) => id,
            None => {
                config.next_id += 1;
                config.next_id - 1
            }
        };
        let position = match k {
            0 => a.position,
            _ => b.position + (k as f64 - 1.0) * d,
        };
        let mut offset = 0.0;
        if overtaking && w.kind == WaveKind::Shock && w.family == a.wave.family {
            if w.family == Family::Backward && a.wave.kind == WaveKind::Shock && k == 0 {
                offset = -nu_shift;
            }
            if w.family == Family::Forward && b.wave.kind == WaveKind::Shock && k + 1 == waves.len() {
                offset = nu_shift;
            }
        }
        outgoing.push(Front {
            id,
            wave: *w,
            position,
            birth_time: config.time,
            generation: lin.generation,
            switched: lin.switched,
            viscous_offset: offset,
        });
    }
    if outgoing.len() == 1 {
        outgoing[0].position = a.position;
    }
    config.fronts.splice(index..index + 2, outgoing.iter().copied());
    let start = index.saturating_sub(1);
    let mut displacement = 0.0;
    for k in start + 1..config.fronts.len() {
        let need = config.fronts[k - 1].position + d;
        if config.fronts[k].position < need {
            let shift = need - config.fronts[k].position;
            if shift > params.reposition_limit {
                return Err(Error::Repositioning(format!("front {} would move by {shift:e} (limit {:e})", config.fronts[k].id, params.reposition_limit)));
            }
            displacement += shift;
            config.fronts[k].position = need;
        } else if k >= index + outgoing.len() {
            break;
        }
    }
    for (o, f) in outgoing.iter_mut().zip(&config.fronts[index..]) {
        o.position = f.position;
    }
    config.j += 1;
    let after = functionals(config, law);
    Ok(InteractionEvent { index: config.j, time: config.time, pair_index: index, threshold: d, tag, incoming: [a, b], outgoing, before, after, displacement })
}

/// Result of a run; the log survives an aborted run.
#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    pub config: Configuration,
    pub events: Vec<InteractionEvent>,
    pub error: Option<Error>,
    /// Pairs of front ids that met more than once.
    pub repeat_pairs: usize,
}

/// Runs until `t_end`, the sentinel, an error, or `max_events`. The
/// observer sees every event after it is applied; its error aborts the run.
pub fn evolve<F>(mut config: Configuration, t_end: f64, params: &SchedulerParams, mut observer: F) -> EvolveOutcome
where
    F: FnMut(&Configuration, &InteractionEvent) -> Result<()>,
{
    let mut events: Vec<InteractionEvent> = Vec::new();
    let mut met = HashSet::new();
    let mut repeat_pairs = 0;
    let mut error = None;
    loop {
        let next = match next_interaction(&config, params) {
            Ok(n) => n,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let (dt, index) = match next {
            NextEvent::At { dt, index } if config.time + dt <= t_end => (dt, index),
            _ => {
                let rest = t_end - config.time;
                config.advance(rest.max(0.0));
                break;
            }
        };
        if events.len() >= params.max_events {
            error = Some(Error::Logic(format!("event cap {} reached at t = {}", params.max_events, config.time)));
            break;
        }
        config.advance(dt);
        let (ia, ib) = (config.fronts[index].id, config.fronts[index + 1].id);
        if !met.insert((ia.min(ib), ia.max(ib))) {
            repeat_pairs += 1;
            log::warn!("fronts {ia} and {ib} interact again at t = {}", config.time);
        }
        match apply_interaction(&mut config, index, params) {
            Ok(ev) => {
                log::debug!("{}", ev.to_record());
                let verdict = observer(&config, &ev);
                events.push(ev);
                if let Err(e) = verdict {
                    error = Some(e);
                    break;
                }
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    EvolveOutcome { config, events, error, repeat_pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::wave_by_size;

    fn params() -> SchedulerParams {
        SchedulerParams::new(GasLaw::default(), 1e-6, 1e-2, 0.05).unwrap()
    }

    fn st(c: RiemannCoords) -> LagrangianState {
        from_riemann(c, &GasLaw::default()).unwrap()
    }

    fn base() -> RiemannCoords {
        to_riemann(LagrangianState { v: 1.0, h: 0.0 }, &GasLaw::default()).unwrap()
    }

    fn wave(family: Family, l: RiemannCoords, sigma: f64) -> (WaveDescriptor, RiemannCoords) {
        let law = GasLaw::default();
        let r = wave_by_size(l, family, sigma, &law).unwrap();
        (WaveDescriptor::physical(family, st(l), st(r), &law).unwrap(), r)
    }

    fn chained(ws: &[WaveDescriptor], l: LagrangianState, r: LagrangianState) {
        let law = GasLaw::default();
        assert_eq!(ws.first().unwrap().left, l);
        assert_eq!(ws.last().unwrap().right, r);
        for p in ws.windows(2) {
            let a = to_riemann(p[0].right, &law).unwrap();
            let b = to_riemann(p[1].left, &law).unwrap();
            assert!(a.dist(&b) < 1e-12);
        }
        for w in ws.iter().filter(|w| w.family == Family::Pseudo) {
            assert!(w.right.h >= w.left.h, "pseudo-shock lowers h: {w:?}");
        }
    }

    #[test]
    fn schedule_values() {
        let s = ThresholdSchedule::cube_root(0.01);
        assert!((s.d(1) - 0.100784).abs() < 1e-6);
        assert_eq!(s.d(0), 0.01f64.powf(0.25));
        let d = ThresholdSchedule::desk(0.01, 100);
        assert!(d.d(100) > 0.2 && d.d(101) < 0.2 + 1e-12);
    }

    #[test]
    fn partition_equal_pieces() {
        let p = params();
        let (w, _) = wave(Family::Forward, base(), 2.5 * p.delta);
        let parts = partition_rarefaction(&w, p.delta, &p.law).unwrap();
        assert_eq!(parts.len(), 3);
        for q in &parts {
            assert!((q.size - 2.5 * p.delta / 3.0).abs() < 1e-14);
            assert!(q.speed > 0.0);
        }
        chained(&parts, w.left, w.right);
        assert!(parts.windows(2).all(|w| w[1].speed > w[0].speed));
    }

    #[test]
    fn zero_jump_is_empty() {
        let p = params();
        let u = LagrangianState { v: 1.2, h: 0.3 };
        assert!(accurate_solver(u, u, &[], &p).unwrap().is_empty());
    }

    #[test]
    fn dispatch_rules() {
        let p = params();
        let rho = p.rho();
        let (s1, m) = wave(Family::Backward, base(), -0.05);
        let (s2, _) = wave(Family::Backward, m, -0.05);
        assert_eq!(dispatch_solver(&s1, &s2, &p).unwrap(), SolverTag::SimplifiedSS);
        let (f, m) = wave(Family::Forward, base(), -0.05);
        let (b, _) = wave(Family::Backward, m, -0.05);
        assert_eq!(dispatch_solver(&f, &b, &p).unwrap(), SolverTag::Accurate);
        assert!(dispatch_solver(&b, &f, &p).is_err());
        let np = WaveDescriptor::pseudo(f.right, LagrangianState { v: f.right.v, h: f.right.h + 0.001 }, &p.law);
        assert_eq!(dispatch_solver(&f, &np, &p).unwrap(), SolverTag::SimplifiedNpS);
        let (s, m) = wave(Family::Backward, base(), -0.5 * rho / 0.04);
        let (r, _) = wave(Family::Backward, m, 0.04);
        assert_eq!(dispatch_solver(&s, &r, &p).unwrap(), SolverTag::SimplifiedSR);
    }

    #[test]
    fn iii1_keeps_sum_and_reflection() {
        let p = params();
        let rho = p.rho();
        let (s1, m) = wave(Family::Backward, base(), -10.0 * rho);
        let (s2, _) = wave(Family::Backward, m, -10.0 * rho);
        let tag = dispatch_solver(&s1, &s2, &p).unwrap();
        assert_eq!(tag, SolverTag::SimplifiedSS);
        let out = solve_interaction(tag, &s1, &s2, &p).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[0].size - (s1.size + s2.size)).abs() < 1e-15);
        let (_, refl) = solve_riemann(s1.left, s2.right, &p.law).unwrap();
        assert!((out[1].strength() - refl.size).abs() < 1e-15);
        chained(&out, s1.left, s2.right);
    }

    #[test]
    fn forward_overtaking_mirrors_backward() {
        let p = params();
        let (s1, m) = wave(Family::Forward, base(), -0.05);
        let (s2, _) = wave(Family::Forward, m, -0.05);
        let out = solve_interaction(SolverTag::SimplifiedSS, &s1, &s2, &p).unwrap();
        assert_eq!(out[0].family, Family::Pseudo);
        assert_eq!(out[1].family, Family::Forward);
        assert!((out[1].size - (s1.size + s2.size)).abs() < 1e-15);
        chained(&out, s1.left, s2.right);
    }

    #[test]
    fn iii2_case2_single_pseudo() {
        let p = params();
        let rho = p.rho();
        // a weak shock followed by a rarefaction raising h above h_L
        let (s, m) = wave(Family::Backward, base(), -0.2 * rho);
        let (r, _) = wave(Family::Backward, m, 0.2 * rho + 0.5 * rho);
        let out = solve_interaction(SolverTag::SimplifiedSR, &s, &r, &p).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].family, Family::Pseudo);
        assert!(out[0].strength() < 2.0 * rho);
        chained(&out, s.left, r.right);
    }

    #[test]
    fn iii2_case1_shock_at_least_rho() {
        let p = params();
        let rho = p.rho();
        let (s, m) = wave(Family::Backward, base(), -0.05);
        let (r, _) = wave(Family::Backward, m, 0.01);
        let out = solve_interaction(SolverTag::SimplifiedSR, &s, &r, &p).unwrap();
        assert_eq!(out[0].kind, WaveKind::Shock);
        assert!(out[0].strength() >= rho);
        chained(&out, s.left, r.right);
        let (r2, m2) = wave(Family::Backward, base(), 0.01);
        let (s2, _) = wave(Family::Backward, m2, -0.05);
        let out = solve_interaction(SolverTag::SimplifiedRS, &r2, &s2, &p).unwrap();
        assert!(out[0].strength() >= rho);
        chained(&out, r2.left, s2.right);
    }

    #[test]
    fn iii3_rarefaction_keeps_strengths() {
        let p = params();
        let (w, a) = wave(Family::Forward, base(), 0.01);
        let r = RiemannCoords { r: a.r + 0.002, s: a.s + 0.001 };
        let np = WaveDescriptor::pseudo(st(a), st(r), &p.law);
        let out = solve_interaction(SolverTag::SimplifiedNpR, &w, &np, &p).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[0].strength() - np.strength()).abs() < 1e-14);
        assert!((out[1].size - w.size).abs() < 1e-14);
        chained(&out, w.left, np.right);
    }

    #[test]
    fn iii3_shock_minimally_strengthened() {
        let p = params();
        let (w, a) = wave(Family::Forward, base(), -0.05);
        // pseudo-shock with almost flat h but a large z drop
        let r = RiemannCoords { r: a.r + 0.003, s: a.s - 0.0029 };
        let np = WaveDescriptor::pseudo(st(a), st(r), &p.law);
        let out = solve_interaction(SolverTag::SimplifiedNpS, &w, &np, &p).unwrap();
        assert!(out[1].strength() >= w.strength() - 1e-15);
        chained(&out, w.left, np.right);
        // mirrored: pseudo-shock left of a backward shock
        let (wb, _) = wave(Family::Backward, r, -0.05);
        let np2 = WaveDescriptor::pseudo(st(a), st(r), &p.law);
        let out = solve_interaction(SolverTag::SimplifiedNpS, &np2, &wb, &p).unwrap();
        assert_eq!(out[0].family, Family::Backward);
        chained(&out, np2.left, wb.right);
    }

    #[test]
    fn adjusted_bumps_to_rho() {
        let p = SchedulerParams::new(GasLaw::default(), 1e-9, 1e-2, 0.05).unwrap();
        let rho = p.rho();
        // a shock that almost cancels a rarefaction leaves a weak outgoing wave
        let (s, m) = wave(Family::Backward, base(), -0.1);
        let (r, _) = wave(Family::Backward, m, 0.1 + 0.3 * rho);
        assert_eq!(dispatch_solver(&s, &r, &p).unwrap(), SolverTag::Adjusted);
        let out = solve_interaction(SolverTag::Adjusted, &s, &r, &p).unwrap();
        for w in out.iter().filter(|w| w.family != Family::Pseudo) {
            assert!(w.strength() >= rho * (1.0 - 1e-12), "{w:?}");
        }
        assert!(out.iter().any(|w| w.family == Family::Pseudo));
        chained(&out, s.left, r.right);
    }

    #[test]
    fn two_fronts_meet_on_schedule() {
        let p = params();
        let (f, m) = wave(Family::Forward, base(), -0.05);
        let (b, _) = wave(Family::Backward, m, -0.05);
        let mut cfg = Configuration::constant(f.left);
        cfg.fronts.push(Front { id: 0, wave: f, position: 0.0, birth_time: 0.0, generation: 1, switched: false, viscous_offset: 0.0 });
        cfg.fronts.push(Front { id: 1, wave: b, position: 3.0, birth_time: 0.0, generation: 1, switched: false, viscous_offset: 0.0 });
        let d1 = p.schedule.d(1);
        let want = (3.0 - d1) / (f.speed - b.speed);
        match next_interaction(&cfg, &p).unwrap() {
            NextEvent::At { dt, index } => {
                assert_eq!(index, 0);
                assert!((dt - want).abs() < 1e-12);
            }
            NextEvent::Sentinel => panic!("expected an event"),
        }
        let out = evolve(cfg, 10.0, &p, |_, _| Ok(()));
        assert!(out.error.is_none());
        assert_eq!(out.events.len(), 1);
        let ev = &out.events[0];
        assert_eq!(ev.outgoing.len(), 2);
        assert!(ev.outgoing.iter().all(|o| o.wave.kind == WaveKind::Shock && o.wave.strength() > 0.05));
        out.config.check_chain(&p.law).unwrap();
    }

    #[test]
    fn cube_root_schedule_exhausts() {
        let mut p = params();
        p.schedule = ThresholdSchedule::cube_root(p.rho());
        let (f, m) = wave(Family::Forward, base(), -0.05);
        let (b, _) = wave(Family::Backward, m, -0.05);
        let mut cfg = Configuration::constant(f.left);
        cfg.fronts.push(Front { id: 0, wave: f, position: 0.0, birth_time: 0.0, generation: 1, switched: false, viscous_offset: 0.0 });
        cfg.fronts.push(Front { id: 1, wave: b, position: 3.0, birth_time: 0.0, generation: 1, switched: false, viscous_offset: 0.0 });
        assert!(matches!(next_interaction(&cfg, &p), Err(Error::ScheduleExhausted { .. })));
        cfg.fronts.pop();
        assert_eq!(next_interaction(&cfg, &p).unwrap(), NextEvent::Sentinel);
    }

    #[test]
    fn init_rejects_dense_jumps() {
        let p = params();
        let data = StepData { states: vec![LagrangianState { v: 1.0, h: 0.0 }, LagrangianState { v: 1.05, h: 0.0 }, LagrangianState { v: 1.0, h: 0.0 }], jumps: vec![0.0, 1.0] };
        assert!(matches!(init_approximation(&data, &p), Err(Error::Config(_))));
    }

    #[test]
    fn init_spreads_fans() {
        let p = params();
        let data = StepData { states: vec![LagrangianState { v: 1.0, h: 0.0 }, LagrangianState { v: 1.05, h: 0.02 }], jumps: vec![0.0] };
        let cfg = init_approximation(&data, &p).unwrap();
        assert!(cfg.fronts.len() >= 2);
        let d0 = p.schedule.d(0);
        assert!(cfg.fronts.windows(2).all(|w| w[1].position - w[0].position >= d0 * (1.0 - 1e-12)));
        cfg.check_chain(&p.law).unwrap();
    }
}
