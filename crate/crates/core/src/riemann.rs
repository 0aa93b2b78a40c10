//! Exact wave curves and the two-wave Riemann solver of the p-system,
//! parametrised by z-ratios in Riemann coordinates.

use crate::error::{Error, Result};
use crate::numerics::safeguarded_newton;
use crate::thermo::{from_riemann, to_riemann, GasLaw, LagrangianState, RiemannCoords};
use serde::{Deserialize, Serialize};

/// Wave family. `Pseudo` sits between the two physical families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Backward,
    Pseudo,
    Forward,
}

impl Family {
    /// 1, 1.5, 2 scaled by two.
    pub fn rank(self) -> u8 {
        match self {
            Family::Backward => 2,
            Family::Pseudo => 3,
            Family::Forward => 4,
        }
    }
    pub fn other(self) -> Family {
        match self {
            Family::Backward => Family::Forward,
            Family::Forward => Family::Backward,
            Family::Pseudo => Family::Pseudo,
        }
    }
    pub fn label(self) -> &'static str {
        match self {
            Family::Backward => "1",
            Family::Pseudo => "np",
            Family::Forward => "2",
        }
    }
}

/// A left j-wave and a right i-wave approach unless j < i or both are pseudo.
pub fn approaching(left: Family, right: Family) -> bool {
    !(left.rank() < right.rank() || (left == Family::Pseudo && right == Family::Pseudo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveKind {
    Shock,
    Rarefaction,
    PseudoShock,
}

impl WaveKind {
    pub fn label(self) -> &'static str {
        match self {
            WaveKind::Shock => "S",
            WaveKind::Rarefaction => "R",
            WaveKind::PseudoShock => "NP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveDescriptor {
    pub family: Family,
    pub kind: WaveKind,
    /// Signed size; for pseudo-shocks the non-negative strength.
    pub size: f64,
    pub left: LagrangianState,
    pub right: LagrangianState,
    pub speed: f64,
}

impl WaveDescriptor {
    pub fn strength(&self) -> f64 {
        self.size.abs()
    }

    /// Absolute pressure jump |p_R - p_L|.
    pub fn pressure_jump(&self, law: &GasLaw) -> f64 {
        (law.p(self.right.v) - law.p(self.left.v)).abs()
    }

    /// Pseudo-shock joining two arbitrary states, at rest.
    pub fn pseudo(left: LagrangianState, right: LagrangianState, law: &GasLaw) -> WaveDescriptor {
        let a = RiemannCoords::from_zh(law.z(left.v), left.h);
        let b = RiemannCoords::from_zh(law.z(right.v), right.h);
        WaveDescriptor { family: Family::Pseudo, kind: WaveKind::PseudoShock, size: a.dist(&b), left, right, speed: 0.0 }
    }

    /// Physical wave whose endpoints lie on one wave curve of `family`.
    pub fn physical(family: Family, left: LagrangianState, right: LagrangianState, law: &GasLaw) -> Result<WaveDescriptor> {
        let a = to_riemann(left, law)?;
        let b = to_riemann(right, law)?;
        let size = match family {
            Family::Backward => b.r - a.r,
            Family::Forward => b.s - a.s,
            Family::Pseudo => return Err(Error::Logic("pseudo-shock is not a physical wave".into())),
        };
        let kind = if size < 0.0 { WaveKind::Shock } else { WaveKind::Rarefaction };
        let speed = match kind {
            WaveKind::Shock => shock_speed(left, right, family, law)?,
            _ => front_speed(family, left, right, law),
        };
        Ok(WaveDescriptor { family, kind, size, left, right, speed })
    }
}

/// Speed carried by a rarefaction front: λ1 of the right state for the
/// backward family, λ2 of the left state for the forward family.
pub fn front_speed(family: Family, left: LagrangianState, right: LagrangianState, law: &GasLaw) -> f64 {
    match family {
        Family::Backward => -law.c(right.v),
        Family::Forward => law.c(left.v),
        Family::Pseudo => 0.0,
    }
}

#[inline]
fn alpha_a(law: &GasLaw) -> f64 {
    0.5 * (law.gamma - 1.0)
}

/// φ̄_bwd(1+e) and its derivative in e, for e > 0, without forming 1+e.
fn phi_shock(e: f64, law: &GasLaw) -> (f64, f64) {
    let g = law.gamma;
    let aa = alpha_a(law);
    let k = (g - 1.0) / (2.0 * g.sqrt());
    let lx = e.ln_1p();
    let a = -(-lx / aa).exp_m1();
    let b = (g * lx / aa).exp_m1();
    let val = k * (a * b).sqrt();
    let d = if e < 1e-9 {
        1.0
    } else {
        let x = 1.0 + e;
        let da = x.powf(-1.0 / aa - 1.0) / aa;
        let db = g / aa * x.powf(g / aa - 1.0);
        k * (da * b + a * db) / (2.0 * (a * b).sqrt())
    };
    (val, d)
}

/// φ̄_bwd and its derivative, no domain check.
fn phi_b(x: f64, law: &GasLaw) -> (f64, f64) {
    if x <= 1.0 {
        return (x - 1.0, 1.0);
    }
    phi_shock(x - 1.0, law)
}

/// Excess e = d - 1 of the backward shock ratio with r dropping by x·z̄.
fn backward_excess(x: f64, law: &GasLaw) -> Result<f64> {
    let mut hi = 1.0;
    while phi_shock(hi, law).0 + hi < x {
        hi *= 2.0;
    }
    safeguarded_newton(
        |e| {
            let (p, dp) = phi_shock(e, law);
            (p + e - x, dp + 1.0)
        },
        0.0,
        hi,
        0.5 * x,
        "backward shock strength",
    )
}

/// Excess e with 1/f = 1 + e of the forward shock whose s drops by x·z̄.
fn forward_excess(x: f64, law: &GasLaw) -> Result<f64> {
    let g = |e: f64| {
        let (p, dp) = phi_shock(e, law);
        let val = (p + e) / (1.0 + e) - x;
        let d = ((dp + 1.0) * (1.0 + e) - (p + e)) / ((1.0 + e) * (1.0 + e));
        (val, d)
    };
    let mut hi = 1.0;
    while g(hi).0 < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Range("forward shock strength unreachable".into()));
        }
    }
    safeguarded_newton(g, 0.0, hi, 0.5 * x, "forward shock strength")
}

fn phi_f(x: f64, law: &GasLaw) -> (f64, f64) {
    let (pb, dpb) = phi_b(1.0 / x, law);
    (-x * pb, -pb + dpb / x)
}

pub fn phi_bwd(x: f64, law: &GasLaw) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("z-ratio must be positive, got {x}")));
    }
    Ok(phi_b(x, law).0)
}

pub fn phi_fwd(x: f64, law: &GasLaw) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("z-ratio must be positive, got {x}")));
    }
    Ok(phi_f(x, law).0)
}

/// Point at z-ratio `ratio` along the wave curve of `family` issued from `base`.
pub fn wave_curve(base: RiemannCoords, family: Family, ratio: f64, law: &GasLaw) -> Result<RiemannCoords> {
    let zb = base.z();
    if !(zb > 0.0) {
        return Err(Error::Vacuum(format!("base state has z = {zb}")));
    }
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Vacuum(format!("z-ratio {ratio} reaches vacuum")));
    }
    let hb = base.h();
    if ratio == 1.0 {
        return Ok(base);
    }
    match family {
        Family::Backward => {
            if ratio < 1.0 {
                // exact invariance of s along the rarefaction branch
                let z = ratio * zb;
                return Ok(RiemannCoords { r: base.s - 2.0 * z, s: base.s });
            }
            Ok(RiemannCoords::from_zh(ratio * zb, hb - phi_b(ratio, law).0 * zb))
        }
        Family::Forward => {
            if ratio > 1.0 {
                let z = ratio * zb;
                return Ok(RiemannCoords { r: base.r, s: base.r + 2.0 * z });
            }
            Ok(RiemannCoords::from_zh(ratio * zb, hb + phi_f(ratio, law).0 * zb))
        }
        Family::Pseudo => Err(Error::Logic("pseudo-shocks have no wave curve".into())),
    }
}

/// Point reached from `base` by a `family` wave of signed size `sigma`.
pub fn wave_by_size(base: RiemannCoords, family: Family, sigma: f64, law: &GasLaw) -> Result<RiemannCoords> {
    if sigma == 0.0 {
        return Ok(base);
    }
    let zb = base.z();
    if sigma > 0.0 {
        let out = match family {
            Family::Backward => RiemannCoords { r: base.r + sigma, s: base.s },
            Family::Forward => RiemannCoords { r: base.r, s: base.s + sigma },
            Family::Pseudo => return Err(Error::Logic("pseudo-shocks have no wave curve".into())),
        };
        if !(out.z() > 0.0) {
            return Err(Error::Vacuum(format!("rarefaction of size {sigma} reaches vacuum")));
        }
        return Ok(out);
    }
    let eta = -sigma;
    let x = eta / zb;
    match family {
        Family::Backward => {
            let e = backward_excess(x, law)?;
            let beta = zb * (phi_shock(e, law).0 - e);
            Ok(RiemannCoords { r: base.r - eta, s: base.s - beta })
        }
        Family::Forward => {
            let e = forward_excess(x, law)?;
            let beta = zb * (phi_shock(e, law).0 - e) / (1.0 + e);
            Ok(RiemannCoords { r: base.r - beta, s: base.s - eta })
        }
        Family::Pseudo => Err(Error::Logic("pseudo-shocks have no wave curve".into())),
    }
}

/// Reflection x → -x, h → -h; swaps families and left/right.
#[inline]
pub fn mirror(rc: RiemannCoords) -> RiemannCoords {
    RiemannCoords { r: -rc.s, s: -rc.r }
}

/// Left state of a `family` wave of size `sigma` ending at `right`.
pub fn left_of_wave(right: RiemannCoords, family: Family, sigma: f64, law: &GasLaw) -> Result<RiemannCoords> {
    Ok(mirror(wave_by_size(mirror(right), family.other(), sigma, law)?))
}

/// Distance of [h] from the Hugoniot value -√(-(p_R - p_L)(v_R - v_L)),
/// relative to the state scale 1 + |h_L| + |h_R|. Both shock families
/// lower h from left to right.
pub fn rh_residual(l: LagrangianState, r: LagrangianState, law: &GasLaw) -> f64 {
    let pv = -(law.p(r.v) - law.p(l.v)) * (r.v - l.v);
    let jump = -(pv.max(0.0)).sqrt();
    ((r.h - l.h) - jump).abs() / (1.0 + l.h.abs() + r.h.abs())
}

/// Rankine–Hugoniot speed of an admissible shock of `family`.
pub fn shock_speed(l: LagrangianState, r: LagrangianState, family: Family, law: &GasLaw) -> Result<f64> {
    let sign = match family {
        Family::Backward => -1.0,
        Family::Forward => 1.0,
        Family::Pseudo => return Ok(0.0),
    };
    if (r.v - l.v).abs() <= 1e-7 * l.v {
        // secant slope of p is ill-conditioned; use the midpoint tangent
        return Ok(sign * (-law.dp(0.5 * (l.v + r.v))).sqrt());
    }
    let res = rh_residual(l, r, law);
    if res > 1e-10 {
        return Err(Error::Consistency(format!("states are not on a Hugoniot locus (residual {res:e})")));
    }
    let s2 = -(law.p(r.v) - law.p(l.v)) / (r.v - l.v);
    let speed = sign * s2.sqrt();
    // Lax: the shock is slower than the characteristic behind it and faster
    // than the one ahead, in absolute value for the backward family
    let (ahead, behind) = match family {
        Family::Backward => (l.v, r.v),
        _ => (r.v, l.v),
    };
    let tol = 1e-12 * speed.abs();
    if !(law.c(ahead) <= speed.abs() + tol && speed.abs() <= law.c(behind) + tol) {
        return Err(Error::Consistency(format!("shock of speed {speed} violates the Lax inequalities")));
    }
    Ok(speed)
}

/// Solve for the backward ratio b of the two-wave solution.
fn solve_b(lc: RiemannCoords, rc: RiemannCoords, law: &GasLaw) -> Result<f64> {
    let (zl, hl) = (lc.z(), lc.h());
    let (zr, hr) = (rc.z(), rc.h());
    if !(hr - hl < zr + zl) {
        return Err(Error::Vacuum(format!("h_R - h_L = {} >= z_L + z_R = {}", hr - hl, zl + zr)));
    }
    let target = hl - hr;
    let q = zl / zr;
    let f = |b: f64| {
        let (p1, d1) = phi_b(b, law);
        let (p2, d2) = phi_b(b * q, law);
        (zl * p1 + zr * p2 - target, zl * d1 + zl * d2)
    };
    if f(1.0).0 == 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (1.0, 1.0);
    if f(1.0).0 > 0.0 {
        loop {
            lo *= 0.5;
            if f(lo).0 <= 0.0 {
                break;
            }
            if lo < 1e-300 {
                return Err(Error::Vacuum("middle state at vacuum".into()));
            }
        }
    } else {
        loop {
            hi *= 2.0;
            if f(hi).0 >= 0.0 {
                break;
            }
            if hi > 1e300 {
                return Err(Error::Numerical { what: "no upper bracket for b".into(), residual: f(hi).0 });
            }
        }
    }
    safeguarded_newton(f, lo, hi, 0.5 * (lo + hi), "Riemann ratio b")
}

/// Exact solution: backward wave U_L → U_M and forward wave U_M → U_R.
pub fn solve_riemann(ul: LagrangianState, ur: LagrangianState, law: &GasLaw) -> Result<(WaveDescriptor, WaveDescriptor)> {
    let lc = to_riemann(ul, law)?;
    let rc = to_riemann(ur, law)?;
    let b = solve_b(lc, rc, law)?;
    let mc = wave_curve(lc, Family::Backward, b, law)?;
    let um = from_riemann(mc, law)?;
    let s1 = if b == 1.0 { 0.0 } else { mc.r - lc.r };
    let s2 = rc.s - mc.s;
    let bwd = descriptor(Family::Backward, s1, ul, um, law)?;
    let fwd = descriptor(Family::Forward, s2, um, ur, law)?;
    Ok((bwd, fwd))
}

fn descriptor(family: Family, size: f64, l: LagrangianState, r: LagrangianState, law: &GasLaw) -> Result<WaveDescriptor> {
    let kind = if size < 0.0 { WaveKind::Shock } else { WaveKind::Rarefaction };
    let speed = if kind == WaveKind::Shock { shock_speed(l, r, family, law)? } else { front_speed(family, l, r, law) };
    Ok(WaveDescriptor { family, kind, size, left: l, right: r, speed })
}

/// Ratio -σ / |p_R - p_L| of a physical shock.
pub fn strength_pressure_ratio(w: &WaveDescriptor, law: &GasLaw) -> Result<f64> {
    if w.kind != WaveKind::Shock {
        return Err(Error::Kind("pressure-strength ratio is defined for shocks".into()));
    }
    Ok(-w.size / w.pressure_jump(law))
}

/// Empirical window [K1, K2] of the ratio over shocks with |σ| ≤ σ_max
/// from base volumes in [v_lo, v_hi].
pub fn fit_pressure_window(law: &GasLaw, v_lo: f64, v_hi: f64, sigma_max: f64, n: usize) -> Result<(f64, f64)> {
    let mut k1 = f64::INFINITY;
    let mut k2 = 0.0f64;
    for i in 0..n {
        let v = v_lo + (v_hi - v_lo) * i as f64 / (n - 1).max(1) as f64;
        let base = LagrangianState { v, h: 0.0 };
        let bc = to_riemann(base, law)?;
        for k in 1..=n {
            let sigma = -sigma_max * k as f64 / n as f64;
            for fam in [Family::Backward, Family::Forward] {
                let end = from_riemann(wave_by_size(bc, fam, sigma, law)?, law)?;
                let w = WaveDescriptor::physical(fam, base, end, law)?;
                let q = strength_pressure_ratio(&w, law)?;
                k1 = k1.min(q);
                k2 = k2.max(q);
            }
        }
    }
    Ok((k1, k2))
}

/// Weak-shock limit of -σ / |Δp|, namely 2 / c(v).
pub fn weak_shock_pressure_ratio(v: f64, law: &GasLaw) -> f64 {
    2.0 / law.c(v)
}

/// Transverse drop β = z̄ H(η/z̄) of the other invariant across a shock of
/// strength η (drop of s across a backward shock with r dropping by η).
pub fn cubic_coupling(eta: f64, base_z: f64, law: &GasLaw) -> Result<f64> {
    if !(base_z > 0.0) {
        return Err(Error::Domain("base z must be positive".into()));
    }
    if eta < 0.0 || eta / base_z > 1.0 {
        return Err(Error::Range(format!("strength {eta} outside the window [0, z̄ = {base_z}]")));
    }
    if eta == 0.0 {
        return Ok(0.0);
    }
    let x = eta / base_z;
    let e = backward_excess(x, law)?;
    Ok(base_z * (phi_shock(e, law).0 - e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(v: f64, h: f64) -> LagrangianState {
        LagrangianState { v, h }
    }

    /// Independent oracle: bisection on the middle volume using the jump
    /// conditions and invariants written directly in (v, h).
    fn oracle_middle(ul: LagrangianState, ur: LagrangianState, law: &GasLaw) -> LagrangianState {
        let h1 = |vm: f64| {
            if vm < ul.v {
                ul.h - ((law.p(vm) - law.p(ul.v)) * (ul.v - vm)).sqrt()
            } else {
                ul.h + law.z(ul.v) - law.z(vm)
            }
        };
        let h2 = |vm: f64| {
            if vm < ur.v {
                ur.h + ((law.p(vm) - law.p(ur.v)) * (ur.v - vm)).sqrt()
            } else {
                ur.h - law.z(ur.v) + law.z(vm)
            }
        };
        // h1 increasing in vm, h2 decreasing: find the crossing
        let (mut lo, mut hi) = (1e-6f64, 1e6f64);
        for _ in 0..400 {
            let mid = (lo * hi).sqrt();
            if h1(mid) - h2(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let vm = (lo * hi).sqrt();
        st(vm, h1(vm))
    }

    #[test]
    fn phi_values() {
        let law = GasLaw::default();
        assert_eq!(phi_bwd(1.0, &law).unwrap(), 0.0);
        assert_eq!(phi_fwd(1.0, &law).unwrap(), 0.0);
        let exact = (1.0 / (2.0 * 2f64.sqrt())) * ((1.0 - 0.25f64) * 15.0).sqrt();
        assert!((phi_bwd(2.0, &law).unwrap() - exact).abs() < 1e-14);
        assert!((exact - 1.185854).abs() < 1e-6);
        assert!(phi_bwd(0.0, &law).is_err());
    }

    #[test]
    fn backward_shock_matches_hugoniot_oracle() {
        let law = GasLaw::default();
        let base = to_riemann(st(1.0, 0.0), &law).unwrap();
        let b = law.z(0.5) / law.z(1.0);
        let out = from_riemann(wave_curve(base, Family::Backward, b, &law).unwrap(), &law).unwrap();
        assert!((out.v - 0.5).abs() < 1e-14);
        assert!((out.h + 1.5f64.sqrt()).abs() < 1e-13, "h = {}", out.h);
        assert!(rh_residual(st(1.0, 0.0), out, &law) < 1e-12);
    }

    #[test]
    fn unit_ratio_and_rarefaction_invariance() {
        let law = GasLaw::air();
        let base = to_riemann(st(1.3, 0.2), &law).unwrap();
        assert_eq!(wave_curve(base, Family::Forward, 1.0, &law).unwrap(), base);
        let p = wave_curve(base, Family::Backward, 0.8, &law).unwrap();
        assert_eq!(p.s, base.s);
        let q = wave_curve(base, Family::Forward, 1.3, &law).unwrap();
        assert_eq!(q.r, base.r);
    }

    #[test]
    fn shock_speed_values() {
        let law = GasLaw::default();
        let l = st(1.0, 0.0);
        let r = st(0.5, -1.5f64.sqrt());
        let s = shock_speed(l, r, Family::Backward, &law).unwrap();
        assert!((s + 6f64.sqrt()).abs() < 1e-12);
        assert!(shock_speed(l, st(0.5, 0.3), Family::Backward, &law).is_err());
        // weak-shock limit
        let base = to_riemann(l, &law).unwrap();
        let weak = from_riemann(wave_by_size(base, Family::Backward, -1e-7, &law).unwrap(), &law).unwrap();
        let s = shock_speed(l, weak, Family::Backward, &law).unwrap();
        assert!((s + law.c(1.0)).abs() < 1e-6);
    }

    #[test]
    fn riemann_trivial_and_symmetric() {
        let law = GasLaw::default();
        let (a, b) = solve_riemann(st(1.2, 0.1), st(1.2, 0.1), &law).unwrap();
        assert_eq!(a.size, 0.0);
        assert_eq!(b.size, 0.0);
        let c = 0.05;
        let (a, b) = solve_riemann(st(1.0, -c), st(1.0, c), &law).unwrap();
        assert_eq!(a.kind, WaveKind::Rarefaction);
        assert_eq!(b.kind, WaveKind::Rarefaction);
        assert!((a.size - b.size).abs() < 1e-13);
    }

    #[test]
    fn riemann_double_shock_matches_bisection_oracle() {
        let law = GasLaw::default();
        let (ul, ur) = (st(1.0, 0.0), st(1.0, -0.2));
        let (a, b) = solve_riemann(ul, ur, &law).unwrap();
        assert_eq!(a.kind, WaveKind::Shock);
        assert_eq!(b.kind, WaveKind::Shock);
        assert!((a.size - b.size).abs() < 1e-12);
        let m = oracle_middle(ul, ur, &law);
        assert!((law.p(a.right.v) - law.p(m.v)).abs() < 1e-10);
        assert!((a.right.h - m.h).abs() < 1e-10);
    }

    #[test]
    fn vacuum_boundary() {
        let law = GasLaw::default();
        let ul = st(1.0, 0.0);
        let zsum = 2.0 * law.z(1.0);
        assert!(solve_riemann(ul, st(1.0, zsum * (1.0 - 1e-6)), &law).is_ok());
        assert!(matches!(solve_riemann(ul, st(1.0, zsum * (1.0 + 1e-6)), &law), Err(Error::Vacuum(_))));
    }

    #[test]
    fn pressure_window() {
        let law = GasLaw::default();
        let (k1, k2) = fit_pressure_window(&law, 0.5, 2.0, 0.1, 20).unwrap();
        assert!(k1 > 0.0 && k2 < 10.0 && k1 < k2);
        // weak limit
        let l = st(1.0, 0.0);
        let bc = to_riemann(l, &law).unwrap();
        let r = from_riemann(wave_by_size(bc, Family::Backward, -1e-8, &law).unwrap(), &law).unwrap();
        let w = WaveDescriptor::physical(Family::Backward, l, r, &law).unwrap();
        let q = strength_pressure_ratio(&w, &law).unwrap();
        assert!((q - weak_shock_pressure_ratio(1.0, &law)).abs() < 1e-6);
        assert!(law.p(r.v) > law.p(l.v));
        let rr = from_riemann(wave_by_size(bc, Family::Backward, 0.01, &law).unwrap(), &law).unwrap();
        let w = WaveDescriptor::physical(Family::Backward, l, rr, &law).unwrap();
        assert!(strength_pressure_ratio(&w, &law).is_err());
    }

    #[test]
    fn coupling_is_cubic() {
        let law = GasLaw::default();
        let z = law.z(1.0);
        assert_eq!(cubic_coupling(0.0, z, &law).unwrap(), 0.0);
        let k: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|e| cubic_coupling(*e, z, &law).unwrap() / e.powi(3)).collect();
        assert!(k[0] > 0.0);
        assert!((k[0] - k[2]).abs() / k[2] < 0.05 && (k[1] - k[2]).abs() / k[2] < 0.05, "{k:?}");
        assert!(cubic_coupling(5.0 * z, z, &law).is_err());
        // transverse jump of an exact backward shock
        let base = to_riemann(st(1.0, 0.0), &law).unwrap();
        let end = wave_by_size(base, Family::Backward, -0.05, &law).unwrap();
        assert!((base.r - end.r - 0.05).abs() < 1e-14);
        assert!((base.s - end.s - cubic_coupling(0.05, z, &law).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn mirror_maps_backward_onto_forward() {
        let law = GasLaw::default();
        let r = to_riemann(st(0.9, 0.1), &law).unwrap();
        let l = left_of_wave(r, Family::Backward, -0.03, &law).unwrap();
        let back = wave_by_size(l, Family::Backward, -0.03, &law).unwrap();
        assert!(back.dist(&r) < 1e-13);
        let l2 = left_of_wave(r, Family::Forward, -0.03, &law).unwrap();
        let back2 = wave_by_size(l2, Family::Forward, -0.03, &law).unwrap();
        assert!(back2.dist(&r) < 1e-13);
    }

    #[test]
    fn approaching_rule() {
        use Family::*;
        assert!(approaching(Forward, Backward));
        assert!(!approaching(Backward, Forward));
        assert!(approaching(Backward, Backward));
        assert!(approaching(Forward, Forward));
        assert!(!approaching(Pseudo, Pseudo));
        assert!(approaching(Pseudo, Backward));
        assert!(approaching(Forward, Pseudo));
        assert!(!approaching(Backward, Pseudo));
        assert!(!approaching(Pseudo, Forward));
    }

    fn gas() -> impl Strategy<Value = GasLaw> {
        prop::sample::select(vec![GasLaw::default(), GasLaw::air()])
    }

    proptest! {
        #[test]
        fn phi_relation_and_monotonicity(x in 0.05f64..20.0, law in gas()) {
            let f = phi_fwd(x, &law).unwrap();
            let b = phi_bwd(1.0 / x, &law).unwrap();
            prop_assert!((f + x * b).abs() <= 1e-12 * (1.0 + f.abs()));
            prop_assert!(phi_bwd(x * 1.001, &law).unwrap() > phi_bwd(x, &law).unwrap());
            prop_assert!(phi_fwd(x * 1.001, &law).unwrap() > phi_fwd(x, &law).unwrap());
        }

        #[test]
        fn shock_branch_on_hugoniot(v in 0.3f64..3.0, h in -1.0f64..1.0, ratio in 1.0f64..3.0, law in gas()) {
            let base = to_riemann(st(v, h), &law).unwrap();
            let out = from_riemann(wave_curve(base, Family::Backward, ratio, &law).unwrap(), &law).unwrap();
            prop_assert!(rh_residual(st(v, h), out, &law) < 1e-10);
            let out2 = from_riemann(wave_curve(base, Family::Forward, 1.0 / ratio, &law).unwrap(), &law).unwrap();
            prop_assert!(rh_residual(st(v, h), out2, &law) < 1e-10);
            if ratio > 1.0 + 1e-6 {
                prop_assert!(shock_speed(st(v, h), out, Family::Backward, &law).is_ok());
                prop_assert!(shock_speed(st(v, h), out2, Family::Forward, &law).is_ok());
            }
        }

        #[test]
        fn single_wave_round_trip(v in 0.5f64..2.0, h in -1.0f64..1.0, sigma in -0.3f64..0.3, law in gas(), fwd in any::<bool>()) {
            let fam = if fwd { Family::Forward } else { Family::Backward };
            let l = st(v, h);
            let end = from_riemann(wave_by_size(to_riemann(l, &law).unwrap(), fam, sigma, &law).unwrap(), &law).unwrap();
            let (a, b) = solve_riemann(l, end, &law).unwrap();
            let (same, other) = if fwd { (b, a) } else { (a, b) };
            prop_assert!(other.size.abs() < 1e-12, "other family size {}", other.size);
            prop_assert!((same.size - sigma).abs() < 1e-11);
        }

        #[test]
        fn solver_agrees_with_oracle(vl in 0.5f64..2.0, hl in -1.0f64..1.0, vr in 0.5f64..2.0, hr in -1.0f64..1.0, law in gas()) {
            let (ul, ur) = (st(vl, hl), st(vr, hr));
            let (a, b) = solve_riemann(ul, ur, &law).unwrap();
            let m = oracle_middle(ul, ur, &law);
            prop_assert!((a.right.v - m.v).abs() < 1e-9 * m.v);
            prop_assert!((a.right.h - m.h).abs() < 1e-9);
            prop_assert_eq!(a.right, b.left);
        }
    }
}
