//! Glimm functionals, per-interaction decay checks, interaction taxonomy,
//! generation orders and wave counts.

use crate::fronttrack::{Configuration, Front, InteractionEvent, SchedulerParams, SolverTag};
use crate::riemann::{approaching, Family, WaveDescriptor, WaveKind};
use crate::thermo::GasLaw;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

/// Relative floor used when comparing a strength with ρ.
pub const RHO_FLOOR: f64 = 1e-9;
/// Absolute slack of the decay inequalities.
pub const DECAY_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GlimmSnapshot {
    pub time: f64,
    pub l: f64,
    pub q: f64,
    pub lbar: f64,
    pub qbar: f64,
}

/// L, Q and their pressure-jump variants.
pub fn functionals(config: &Configuration, law: &GasLaw) -> GlimmSnapshot {
    let s: Vec<f64> = config.fronts.iter().map(|f| f.wave.strength()).collect();
    let sb: Vec<f64> = config.fronts.iter().map(|f| f.wave.pressure_jump(law)).collect();
    let mut snap = GlimmSnapshot { time: config.time, l: s.iter().sum(), lbar: sb.iter().sum(), ..Default::default() };
    for i in 0..s.len() {
        for k in i + 1..s.len() {
            if approaching(config.fronts[i].wave.family, config.fronts[k].wave.family) {
                snap.q += s[i] * s[k];
                snap.qbar += sb[i] * sb[k];
            }
        }
    }
    snap
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Key1Report {
    /// ΔQ + ¾|σ₁σ₂|, must be ≤ 0.
    pub dq_margin: f64,
    /// ΔL + κΔQ + κ/2·|σ₁σ₂|, must be ≤ 0.
    pub combined_margin: f64,
    /// ΔL / |σ₁σ₂|.
    pub dl_ratio: f64,
    /// Smallest κ for which the combined inequality holds.
    pub kappa_needed: f64,
    pub pass: bool,
}

/// Smallest κ with ΔL + κ(ΔQ + ½|σ₁σ₂|) ≤ 0; infinite if none exists.
pub fn kappa_needed(ev: &InteractionEvent) -> f64 {
    let p = ev.product();
    let dl = ev.delta_l();
    let gain = -(ev.delta_q() + 0.5 * p);
    if dl <= DECAY_SLACK {
        0.0
    } else if gain > 0.0 {
        (dl - DECAY_SLACK) / gain
    } else {
        f64::INFINITY
    }
}

pub fn check_key1(ev: &InteractionEvent, kappa: f64) -> Key1Report {
    let p = ev.product();
    let dq_margin = ev.delta_q() + 0.75 * p;
    let combined_margin = ev.delta_l() + kappa * ev.delta_q() + 0.5 * kappa * p;
    Key1Report {
        dq_margin,
        combined_margin,
        dl_ratio: if p > 0.0 { ev.delta_l() / p } else { 0.0 },
        kappa_needed: kappa_needed(ev),
        pass: dq_margin <= DECAY_SLACK && combined_margin <= DECAY_SLACK,
    }
}

/// Bounds asserted by `check_key2`, as multiples of δ and ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Key2Limits {
    pub c_rarefaction: f64,
    pub c_pseudo: f64,
}

impl Default for Key2Limits {
    fn default() -> Self {
        Key2Limits { c_rarefaction: 2.0, c_pseudo: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Key2Report {
    pub max_rarefaction_over_delta: f64,
    /// Smallest physical strength over ρ; infinite without physical fronts.
    pub min_physical_over_rho: f64,
    pub max_pseudo_over_rho: f64,
    /// Most negative h_R − h_L across a pseudo-shock (0 if none decreases).
    pub worst_pseudo_drop: f64,
    pub pass: bool,
}

pub fn check_key2(config: &Configuration, params: &SchedulerParams, limits: &Key2Limits) -> Key2Report {
    let rho = params.rho();
    let mut rep = Key2Report {
        max_rarefaction_over_delta: 0.0,
        min_physical_over_rho: f64::INFINITY,
        max_pseudo_over_rho: 0.0,
        worst_pseudo_drop: 0.0,
        pass: true,
    };
    for f in &config.fronts {
        let w = &f.wave;
        match w.kind {
            WaveKind::PseudoShock => {
                rep.max_pseudo_over_rho = rep.max_pseudo_over_rho.max(w.strength() / rho);
                rep.worst_pseudo_drop = rep.worst_pseudo_drop.min(w.right.h - w.left.h);
            }
            k => {
                rep.min_physical_over_rho = rep.min_physical_over_rho.min(w.strength() / rho);
                if k == WaveKind::Rarefaction {
                    rep.max_rarefaction_over_delta = rep.max_rarefaction_over_delta.max(w.size / params.delta);
                }
            }
        }
    }
    rep.pass = rep.min_physical_over_rho >= 1.0 - RHO_FLOOR
        && rep.worst_pseudo_drop >= 0.0
        && rep.max_pseudo_over_rho <= limits.c_pseudo
        && rep.max_rarefaction_over_delta <= limits.c_rarefaction;
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Taxonomy {
    Ia,
    Ib,
    IbPrime,
    Ic,
    IIa,
    IIb,
    IIc,
    IIaPrime,
    IIbPrime,
    IIcPrime,
    NotClassifiable,
}

impl Taxonomy {
    pub fn label(self) -> &'static str {
        match self {
            Taxonomy::Ia => "Ia",
            Taxonomy::Ib => "Ib",
            Taxonomy::IbPrime => "Ib'",
            Taxonomy::Ic => "Ic",
            Taxonomy::IIa => "IIa",
            Taxonomy::IIb => "IIb",
            Taxonomy::IIc => "IIc",
            Taxonomy::IIaPrime => "IIa'",
            Taxonomy::IIbPrime => "IIb'",
            Taxonomy::IIcPrime => "IIc'",
            Taxonomy::NotClassifiable => "n/a",
        }
    }
}

/// Type of a physical pair (left `a`, right `b`).
pub fn classify_pair(a: &WaveDescriptor, b: &WaveDescriptor) -> Taxonomy {
    use Family::*;
    use WaveKind::*;
    match (a.family, a.kind, b.family, b.kind) {
        (Forward, Rarefaction, Backward, Rarefaction) => Taxonomy::Ia,
        (Forward, Rarefaction, Backward, Shock) => Taxonomy::Ib,
        (Forward, Shock, Backward, Rarefaction) => Taxonomy::IbPrime,
        (Forward, Shock, Backward, Shock) => Taxonomy::Ic,
        (Backward, Shock, Backward, Shock) => Taxonomy::IIa,
        (Backward, Shock, Backward, Rarefaction) => Taxonomy::IIb,
        (Backward, Rarefaction, Backward, Shock) => Taxonomy::IIc,
        (Forward, Shock, Forward, Shock) => Taxonomy::IIaPrime,
        (Forward, Rarefaction, Forward, Shock) => Taxonomy::IIbPrime,
        (Forward, Shock, Forward, Rarefaction) => Taxonomy::IIcPrime,
        _ => Taxonomy::NotClassifiable,
    }
}

pub fn classify(ev: &InteractionEvent) -> Taxonomy {
    classify_pair(&ev.incoming[0].wave, &ev.incoming[1].wave)
}

/// Sum of signed sizes of one family, and the kinds present.
fn family_total(ws: &[WaveDescriptor], f: Family) -> (f64, Vec<WaveKind>) {
    let sel: Vec<&WaveDescriptor> = ws.iter().filter(|w| w.family == f).collect();
    (sel.iter().map(|w| w.size).sum(), sel.iter().map(|w| w.kind).collect())
}

/// Absolute round-off of a wave size, in Riemann-invariant units.
const ROUNDOFF_SIZE: f64 = 1e-13;

/// Checks the outcome table for exactly solved physical pairs. Returns the
/// taxonomy tag and the first violated rule, if any.
pub fn check_outcome(a: &WaveDescriptor, b: &WaveDescriptor, out: &[WaveDescriptor]) -> (Taxonomy, Option<String>) {
    let tag = classify_pair(a, b);
    let tol = 1e-12;
    let (s1, k1) = family_total(out, Family::Backward);
    let (s2, k2) = family_total(out, Family::Forward);
    let kinds_are = |ks: &[WaveKind], k: WaveKind| !ks.is_empty() && ks.iter().all(|x| *x == k);
    let fail = |m: &str| (tag, Some(m.to_string()));
    match tag {
        Taxonomy::Ia | Taxonomy::Ib | Taxonomy::IbPrime | Taxonomy::Ic => {
            // a is forward, b is backward
            if !kinds_are(&k1, b.kind) || !kinds_are(&k2, a.kind) {
                return fail("head-on interaction changed a wave type");
            }
            match tag {
                Taxonomy::Ia => {
                    if (s1 - b.size).abs() > tol || (s2 - a.size).abs() > tol {
                        return fail("rarefactions changed strength");
                    }
                }
                Taxonomy::Ib | Taxonomy::IbPrime => {
                    let (sh, sh_out, ra, ra_out) = if a.kind == WaveKind::Shock { (a.size, s2, b.size, s1) } else { (b.size, s1, a.size, s2) };
                    if (sh - sh_out).abs() > tol * (1.0 + sh.abs()) {
                        return fail("shock strength not preserved");
                    }
                    if ra_out <= ra {
                        return fail("rarefaction did not grow");
                    }
                }
                _ => {
                    // growth is cubic in the strengths and can sit below round-off
                    let slack = |x: f64| x * (1.0 - tol) - ROUNDOFF_SIZE;
                    if s1.abs() < slack(b.strength()) || s2.abs() < slack(a.strength()) {
                        return fail("shocks did not both grow");
                    }
                }
            }
        }
        Taxonomy::IIa | Taxonomy::IIaPrime => {
            let (same, refl_kinds) = if tag == Taxonomy::IIa { (s1, &k2) } else { (s2, &k1) };
            if !refl_kinds.iter().all(|k| *k == WaveKind::Rarefaction) {
                return fail("reflected wave is not a rarefaction");
            }
            if (same - (a.size + b.size)).abs() > tol {
                return fail("outgoing shock is not the sum");
            }
        }
        Taxonomy::IIb | Taxonomy::IIc | Taxonomy::IIbPrime | Taxonomy::IIcPrime => {
            let refl = if a.family == Family::Backward { &k2 } else { &k1 };
            if !refl.iter().all(|k| *k == WaveKind::Shock) {
                return fail("reflected wave is not a shock");
            }
        }
        Taxonomy::NotClassifiable => {}
    }
    (tag, None)
}

/// Identity and order of an outgoing wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    /// Id of the incoming front this wave continues.
    pub continues: Option<u64>,
    pub generation: u32,
    pub switched: bool,
}

/// Generation orders of the outgoing waves of one interaction.
pub fn assign_generation(tag: SolverTag, incoming: &[Front; 2], out: &[WaveDescriptor]) -> Vec<Lineage> {
    let [a, b] = incoming;
    let mut used: HashSet<u64> = HashSet::new();
    let mut take = |f: &Front| if used.insert(f.id) { Some(f.id) } else { None };
    let fresh = |g: u32| Lineage { continues: None, generation: g, switched: false };
    let mut res = Vec::with_capacity(out.len());
    let head_on = a.wave.family != b.wave.family;
    match tag {
        _ if head_on => {
            // head-on pairs and pseudo-shock interactions keep their orders
            for w in out {
                let src = if w.family == a.wave.family { Some(a) } else if w.family == b.wave.family { Some(b) } else { None };
                res.push(match src {
                    Some(f) => Lineage { continues: take(f), generation: f.generation, switched: false },
                    None => fresh(a.generation.min(b.generation)),
                });
            }
        }
        SolverTag::SimplifiedSR | SolverTag::SimplifiedRS => {
            let (shock, rar) = if a.wave.kind == WaveKind::Shock { (a, b) } else { (b, a) };
            let shock_case = out.iter().any(|w| w.kind == WaveKind::Shock);
            for w in out {
                res.push(match w.kind {
                    WaveKind::Shock => Lineage { continues: take(shock), generation: shock.generation, switched: false },
                    WaveKind::Rarefaction if !shock_case => Lineage { continues: take(rar), generation: rar.generation, switched: false },
                    _ => fresh(rar.generation),
                });
            }
        }
        _ => {
            let lead = if b.generation < a.generation { b } else { a };
            let kmin = a.generation.min(b.generation);
            let kmax = a.generation.max(b.generation);
            let both_shocks = a.wave.kind == WaveKind::Shock && b.wave.kind == WaveKind::Shock;
            let mut switched_given = false;
            for w in out {
                if w.family == a.wave.family {
                    res.push(Lineage { continues: take(lead), generation: kmin, switched: false });
                } else {
                    let switched = both_shocks && w.kind == WaveKind::Rarefaction && !switched_given;
                    switched_given |= switched;
                    res.push(Lineage { continues: None, generation: kmax + 1, switched });
                }
            }
        }
    }
    res
}

/// Largest strength seen per front id, with its order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationLedger {
    pub waves: BTreeMap<u64, (u32, f64, bool)>,
}

impl GenerationLedger {
    pub fn record(&mut self, f: &Front) {
        if f.wave.family == Family::Pseudo {
            return;
        }
        let e = self.waves.entry(f.id).or_insert((f.generation, 0.0, f.switched));
        e.0 = f.generation;
        e.1 = e.1.max(f.wave.strength());
        e.2 |= f.switched;
    }

    pub fn from_run(initial: &Configuration, events: &[InteractionEvent]) -> Self {
        let mut g = GenerationLedger::default();
        initial.fronts.iter().for_each(|f| g.record(f));
        for ev in events {
            ev.outgoing.iter().for_each(|f| g.record(f));
        }
        g
    }

    pub fn max_generation(&self) -> u32 {
        self.waves.values().map(|w| w.0).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Key5Report {
    /// Fitted C = max over waves of |σ|^(1/k)/ε.
    pub c_fit: f64,
    /// Largest strength per generation.
    pub per_generation: Vec<(u32, f64)>,
    pub pass: bool,
}

/// Fits a single C with |σ| ≤ (Cε)^k for every physical wave; passes when
/// Cε < 1 so strengths decay with the order.
pub fn check_key5(ledger: &GenerationLedger, eps: f64) -> Key5Report {
    let mut per: BTreeMap<u32, f64> = BTreeMap::new();
    let mut c: f64 = 0.0;
    for &(k, s, _) in ledger.waves.values() {
        let e = per.entry(k).or_insert(0.0);
        *e = e.max(s);
        c = c.max(s.powf(1.0 / k as f64) / eps);
    }
    Key5Report { c_fit: c, per_generation: per.into_iter().collect(), pass: c * eps < 1.0 }
}

/// Order bound C·ln(ρ⁻¹)/ln(ε⁻¹) with C = 1.
pub fn generation_bound(rho: f64, eps: f64) -> f64 {
    (1.0 / rho).ln() / (1.0 / eps).ln()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub physical_waves: usize,
    pub all_waves: usize,
    pub interactions: usize,
    /// δ⁻¹ ln ρ⁻¹.
    pub scale: f64,
    pub c_physical: f64,
    pub c_all: f64,
    pub c_interactions: f64,
    pub total_pseudo_strength: f64,
    /// ρ (δ⁻¹ ln ρ⁻¹)².
    pub smallness: f64,
}

/// ρ (δ⁻¹ ln ρ⁻¹)².
pub fn smallness(rho: f64, delta: f64) -> f64 {
    rho * ((1.0 / rho).ln() / delta).powi(2)
}

/// Distinct fronts and events against powers of δ⁻¹ ln ρ⁻¹.
pub fn count_report(initial: &Configuration, events: &[InteractionEvent], last: &Configuration, params: &SchedulerParams) -> CountReport {
    let rho = params.rho();
    let mut phys = HashSet::new();
    let mut all = HashSet::new();
    let fronts = initial.fronts.iter().chain(events.iter().flat_map(|e| e.outgoing.iter()));
    for f in fronts {
        all.insert(f.id);
        if f.wave.family != Family::Pseudo {
            phys.insert(f.id);
        }
    }
    let scale = (1.0 / rho).ln() / params.delta;
    let total_pseudo_strength = last.fronts.iter().filter(|f| f.wave.family == Family::Pseudo).map(|f| f.wave.strength()).sum();
    CountReport {
        physical_waves: phys.len(),
        all_waves: all.len(),
        interactions: events.len(),
        scale,
        c_physical: phys.len() as f64 / scale,
        c_all: all.len() as f64 / scale.powi(2),
        c_interactions: events.len() as f64 / scale.powi(3),
        total_pseudo_strength,
        smallness: smallness(rho, params.delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronttrack::{apply_interaction, solve_interaction, Front};
    use crate::riemann::wave_by_size;
    use crate::thermo::{from_riemann, to_riemann, LagrangianState, RiemannCoords};

    fn law() -> GasLaw {
        GasLaw::default()
    }

    fn wave(family: Family, l: RiemannCoords, sigma: f64) -> (WaveDescriptor, RiemannCoords) {
        let law = law();
        let r = wave_by_size(l, family, sigma, &law).unwrap();
        let w = WaveDescriptor::physical(family, from_riemann(l, &law).unwrap(), from_riemann(r, &law).unwrap(), &law).unwrap();
        (w, r)
    }

    fn base() -> RiemannCoords {
        to_riemann(LagrangianState { v: 1.0, h: 0.0 }, &law()).unwrap()
    }

    fn front(id: u64, w: WaveDescriptor, x: f64, g: u32) -> Front {
        Front { id, wave: w, position: x, birth_time: 0.0, generation: g, switched: false, viscous_offset: 0.0 }
    }

    fn config(ws: &[WaveDescriptor]) -> Configuration {
        let mut c = Configuration::constant(ws[0].left);
        for (i, w) in ws.iter().enumerate() {
            c.fronts.push(front(i as u64, *w, i as f64, 1));
        }
        c.next_id = ws.len() as u64;
        c
    }

    fn params() -> SchedulerParams {
        SchedulerParams::new(law(), 1e-6, 1e-2, 0.05).unwrap()
    }

    #[test]
    fn empty_functionals() {
        let c = Configuration::constant(LagrangianState { v: 1.0, h: 0.0 });
        let s = functionals(&c, &law());
        assert_eq!((s.l, s.q), (0.0, 0.0));
    }

    #[test]
    fn approaching_pairs_in_q() {
        let (f, m) = wave(Family::Forward, base(), -0.03);
        let (b, _) = wave(Family::Backward, m, -0.02);
        let s = functionals(&config(&[f, b]), &law());
        assert!((s.q - 0.03 * 0.02).abs() < 1e-15);
        let (b, m) = wave(Family::Backward, base(), -0.02);
        let (f, _) = wave(Family::Forward, m, -0.03);
        assert_eq!(functionals(&config(&[b, f]), &law()).q, 0.0);
        let (r1, m) = wave(Family::Backward, base(), 0.01);
        let (r2, _) = wave(Family::Backward, m, 0.01);
        assert!((functionals(&config(&[r1, r2]), &law()).q - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn head_on_rarefactions_decay() {
        let p = params();
        let (f, m) = wave(Family::Forward, base(), 0.01);
        let (b, _) = wave(Family::Backward, m, 0.01);
        let mut c = config(&[f, b]);
        let ev = apply_interaction(&mut c, 0, &p).unwrap();
        assert!((ev.delta_q() + 1e-4).abs() < 1e-15);
        assert!(ev.delta_l().abs() < 1e-12, "{}", ev.delta_l());
        assert!(check_key1(&ev, 1.0).pass);
        let (tag, bad) = check_outcome(&f, &b, &ev.outgoing.iter().map(|o| o.wave).collect::<Vec<_>>());
        assert_eq!(tag, Taxonomy::Ia);
        assert!(bad.is_none());
    }

    #[test]
    fn outcome_table() {
        let p = params();
        let (f, m) = wave(Family::Forward, base(), 0.01);
        let (b, _) = wave(Family::Backward, m, -0.02);
        let out = solve_interaction(SolverTag::Accurate, &f, &b, &p).unwrap();
        assert_eq!(check_outcome(&f, &b, &out), (Taxonomy::Ib, None));
        let (s1, m) = wave(Family::Backward, base(), -0.04);
        let (s2, _) = wave(Family::Backward, m, -0.03);
        let out = solve_interaction(SolverTag::Accurate, &s1, &s2, &p).unwrap();
        assert_eq!(check_outcome(&s1, &s2, &out), (Taxonomy::IIa, None));
        let (f, m) = wave(Family::Forward, base(), -0.03);
        let (b, _) = wave(Family::Backward, m, -0.02);
        let out = solve_interaction(SolverTag::Accurate, &f, &b, &p).unwrap();
        assert_eq!(check_outcome(&f, &b, &out), (Taxonomy::Ic, None));
    }

    #[test]
    fn generation_rules() {
        let p = params();
        let (s1, m) = wave(Family::Backward, base(), -0.2);
        let (s2, _) = wave(Family::Backward, m, -0.2);
        let out = solve_interaction(SolverTag::Accurate, &s1, &s2, &p).unwrap();
        let lin = assign_generation(SolverTag::Accurate, &[front(0, s1, 0.0, 1), front(1, s2, 1.0, 1)], &out);
        assert_eq!(lin[0], Lineage { continues: Some(0), generation: 1, switched: false });
        assert!(lin[1..].iter().all(|l| l.generation == 2 && l.continues.is_none()));
        assert!(lin[1].switched);
        let (f, m) = wave(Family::Forward, base(), 0.01);
        let (b, _) = wave(Family::Backward, m, -0.02);
        let out = solve_interaction(SolverTag::Accurate, &f, &b, &p).unwrap();
        let lin = assign_generation(SolverTag::Accurate, &[front(0, f, 0.0, 1), front(1, b, 1.0, 2)], &out);
        assert_eq!(lin[0].generation, 2);
        assert_eq!(lin[1].generation, 1);
        assert_eq!(lin[0].continues, Some(1));
    }

    #[test]
    fn case2_takes_rarefaction_order() {
        let p = params();
        let rho = p.rho();
        let (s, m) = wave(Family::Backward, base(), -2.0 * rho);
        let (r, _) = wave(Family::Backward, m, 0.03);
        let out = solve_interaction(SolverTag::SimplifiedSR, &s, &r, &p).unwrap();
        assert!(out.iter().all(|w| w.kind != WaveKind::Shock));
        let lin = assign_generation(SolverTag::SimplifiedSR, &[front(0, s, 0.0, 1), front(1, r, 1.0, 3)], &out);
        assert!(lin.iter().all(|l| l.generation == 3));
    }

    #[test]
    fn key2_flags_decreasing_pseudo() {
        let p = params();
        let (s, _) = wave(Family::Backward, base(), -0.05);
        let mut c = config(&[s]);
        assert!(check_key2(&c, &p, &Key2Limits::default()).pass);
        let l = s.right;
        let r = LagrangianState { v: l.v, h: l.h - 1e-3 };
        c.fronts.push(front(1, WaveDescriptor::pseudo(l, r, &p.law), 1.0, 1));
        let rep = check_key2(&c, &p, &Key2Limits::default());
        assert!(!rep.pass && rep.worst_pseudo_drop < 0.0);
    }

    #[test]
    fn smallness_decreases_along_preset() {
        let vals: Vec<f64> = [1e-3f64, 1e-6, 1e-9].iter().map(|nu| smallness(nu.cbrt(), nu.powf(1.0 / 240.0))).collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    }
}
