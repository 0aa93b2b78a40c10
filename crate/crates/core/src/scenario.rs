//! Initial data presets, seeded random small-BV data, and checked runs.

use crate::error::{Error, Result};
use crate::fronttrack::{evolve, Configuration, InteractionEvent, SchedulerParams, StepData};
use crate::glimm::{check_key1, check_key2, check_key5, check_outcome, count_report, CountReport, GenerationLedger, Key2Limits, Key5Report};
use crate::riemann::{wave_by_size, Family};
use crate::thermo::{from_riemann, to_riemann, GasLaw, LagrangianState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Named initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Preset {
    SingleShock { sigma: f64 },
    SingleRarefaction { sigma: f64 },
    TwoShockHeadon { sigma: f64, gap: f64 },
    ShockRarefactionOvertake { shock: f64, rarefaction: f64, gap: f64 },
    RandomSmallBv { seed: u64, eps: f64, jumps: usize },
    Steps { states: Vec<[f64; 2]>, jumps: Vec<f64> },
}

/// Reference state used by the presets.
pub fn reference_state() -> LagrangianState {
    LagrangianState { v: 1.0, h: 0.0 }
}

fn compose(u: LagrangianState, waves: &[(Family, f64)], law: &GasLaw) -> Result<LagrangianState> {
    let mut c = to_riemann(u, law)?;
    for &(f, s) in waves {
        c = wave_by_size(c, f, s, law)?;
    }
    from_riemann(c, law)
}

impl Preset {
    pub fn step_data(&self, params: &SchedulerParams) -> Result<StepData> {
        let law = &params.law;
        let u0 = reference_state();
        match self {
            Preset::SingleShock { sigma } => {
                Ok(StepData { states: vec![u0, compose(u0, &[(Family::Backward, -sigma.abs())], law)?], jumps: vec![0.0] })
            }
            Preset::SingleRarefaction { sigma } => {
                Ok(StepData { states: vec![u0, compose(u0, &[(Family::Backward, sigma.abs())], law)?], jumps: vec![0.0] })
            }
            Preset::TwoShockHeadon { sigma, gap } => {
                let u1 = compose(u0, &[(Family::Forward, -sigma.abs())], law)?;
                let u2 = compose(u1, &[(Family::Backward, -sigma.abs())], law)?;
                Ok(StepData { states: vec![u0, u1, u2], jumps: vec![0.0, *gap] })
            }
            Preset::ShockRarefactionOvertake { shock, rarefaction, gap } => {
                let u1 = compose(u0, &[(Family::Backward, -shock.abs())], law)?;
                let u2 = compose(u1, &[(Family::Backward, rarefaction.abs())], law)?;
                Ok(StepData { states: vec![u0, u1, u2], jumps: vec![0.0, *gap] })
            }
            Preset::RandomSmallBv { seed, eps, jumps } => random_small_bv(*seed, *eps, *jumps, params),
            Preset::Steps { states, jumps } => {
                let states = states.iter().map(|s| LagrangianState::new(s[0], s[1])).collect::<Result<Vec<_>>>()?;
                let d = StepData { states, jumps: jumps.clone() };
                d.validate()?;
                Ok(d)
            }
        }
    }
}

/// Random piecewise-constant data built wave by wave: every jump carries
/// at most one wave per family, physical sizes in [ρ, 3ρ] for shocks and
/// [ρ, δ] for rarefactions, total size ≤ ε.
pub fn random_small_bv(seed: u64, eps: f64, jumps: usize, params: &SchedulerParams) -> Result<StepData> {
    let law = &params.law;
    let rho = params.rho();
    if jumps == 0 || eps < rho {
        return Err(Error::Config(format!("need at least one jump and eps ≥ rho (eps = {eps}, rho = {rho})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut budget = eps;
    let mut states = vec![reference_state()];
    let mut widths = Vec::new();
    let d0 = params.schedule.d(0);
    for _ in 0..jumps {
        let mut waves = Vec::new();
        for f in [Family::Backward, Family::Forward] {
            if budget < rho * (1.0 + 1e-12) || rng.gen::<f64>() < 0.3 {
                continue;
            }
            let shock = rng.gen::<bool>();
            let size = if shock {
                -rng.gen_range(rho..=(3.0 * rho).min(budget))
            } else {
                let hi = params.delta.min(budget).max(rho);
                if hi > rho { rng.gen_range(rho..=hi) } else { rho }
            };
            budget -= size.abs();
            waves.push((f, size));
        }
        if waves.is_empty() {
            if budget < rho * (1.0 + 1e-12) {
                break;
            }
            let size = -rng.gen_range(rho..=(3.0 * rho).min(budget));
            budget -= size.abs();
            waves.push((if rng.gen::<bool>() { Family::Backward } else { Family::Forward }, size));
        }
        let last = *states.last().unwrap();
        let next = compose(last, &waves, law)?;
        // spread of the fan once its fronts are d0 apart
        let fan = crate::fronttrack::accurate_solver(last, next, &[], params)?;
        let gap = fan.windows(2).map(|w| w[1].speed - w[0].speed).fold(f64::INFINITY, f64::min);
        let width = if fan.len() > 1 { fan.iter().map(|w| w.speed.abs()).fold(0.0, f64::max) * d0 / gap } else { 0.0 };
        widths.push(width);
        states.push(next);
    }
    let min_gap = rho.powf(0.2) / params.delta;
    let mut xs = vec![0.0];
    for k in 1..widths.len() {
        let x = xs[k - 1] + 1.05 * min_gap + widths[k - 1] + widths[k] + d0;
        xs.push(x);
    }
    Ok(StepData { states, jumps: xs })
}

/// Summary of one checked run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub events: usize,
    pub initial_l: f64,
    pub max_l: f64,
    pub worst_dq_margin: f64,
    pub worst_combined_margin: f64,
    pub max_dl_ratio: f64,
    pub kappa_needed: f64,
    pub key1_failures: usize,
    pub min_physical_over_rho: f64,
    pub max_pseudo_over_rho: f64,
    pub max_rarefaction_over_delta: f64,
    pub worst_pseudo_drop: f64,
    pub key2_failures: usize,
    pub outcome_failures: usize,
    pub repeat_pairs: usize,
    pub counts: CountReport,
    pub key5: Key5Report,
    pub max_generation: u32,
    pub error: Option<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.key1_failures == 0 && self.key2_failures == 0 && self.outcome_failures == 0
    }
}

/// Evolves `initial` to `t_end` with the key checks after every event.
/// `extra` sees each event as well, for further checks.
pub fn run_checked<F>(initial: &Configuration, t_end: f64, params: &SchedulerParams, limits: &Key2Limits, strict: bool, mut extra: F) -> (RunReport, Vec<InteractionEvent>, Configuration)
where
    F: FnMut(&Configuration, &InteractionEvent) -> Result<()>,
{
    let k2 = check_key2(initial, params, limits);
    let mut rep = RunReport {
        events: 0,
        initial_l: crate::glimm::functionals(initial, &params.law).l,
        max_l: 0.0,
        worst_dq_margin: f64::NEG_INFINITY,
        worst_combined_margin: f64::NEG_INFINITY,
        max_dl_ratio: f64::NEG_INFINITY,
        kappa_needed: 0.0,
        key1_failures: 0,
        min_physical_over_rho: k2.min_physical_over_rho,
        max_pseudo_over_rho: k2.max_pseudo_over_rho,
        max_rarefaction_over_delta: k2.max_rarefaction_over_delta,
        worst_pseudo_drop: k2.worst_pseudo_drop,
        key2_failures: usize::from(!k2.pass),
        outcome_failures: 0,
        repeat_pairs: 0,
        counts: count_report(initial, &[], initial, params),
        key5: check_key5(&GenerationLedger::default(), params.eps),
        max_generation: 1,
        error: None,
    };
    rep.max_l = rep.initial_l;
    let out = evolve(initial.clone(), t_end, params, |cfg, ev| {
        let k1 = check_key1(ev, params.kappa);
        rep.worst_dq_margin = rep.worst_dq_margin.max(k1.dq_margin);
        rep.worst_combined_margin = rep.worst_combined_margin.max(k1.combined_margin);
        rep.max_dl_ratio = rep.max_dl_ratio.max(k1.dl_ratio);
        rep.kappa_needed = rep.kappa_needed.max(k1.kappa_needed);
        rep.max_l = rep.max_l.max(ev.after.l);
        let k2 = check_key2(cfg, params, limits);
        rep.min_physical_over_rho = rep.min_physical_over_rho.min(k2.min_physical_over_rho);
        rep.max_pseudo_over_rho = rep.max_pseudo_over_rho.max(k2.max_pseudo_over_rho);
        rep.max_rarefaction_over_delta = rep.max_rarefaction_over_delta.max(k2.max_rarefaction_over_delta);
        rep.worst_pseudo_drop = rep.worst_pseudo_drop.min(k2.worst_pseudo_drop);
        let mut bad = None;
        if !k1.pass {
            rep.key1_failures += 1;
            bad = Some(format!("event {}: decay inequality violated ({:?})", ev.index, k1));
        }
        if !k2.pass {
            rep.key2_failures += 1;
            bad = Some(format!("event {}: strength window violated ({:?})", ev.index, k2));
        }
        if ev.tag == crate::fronttrack::SolverTag::Accurate {
            let outs: Vec<_> = ev.outgoing.iter().map(|f| f.wave).collect();
            if let (_, Some(m)) = check_outcome(&ev.incoming[0].wave, &ev.incoming[1].wave, &outs) {
                rep.outcome_failures += 1;
                bad = Some(format!("event {}: {m}", ev.index));
            }
        }
        cfg.check_chain(&params.law)?;
        extra(cfg, ev)?;
        match bad {
            Some(m) if strict => Err(Error::Monotonicity(m)),
            Some(m) => {
                log::warn!("{m}");
                Ok(())
            }
            None => Ok(()),
        }
    });
    rep.events = out.events.len();
    rep.repeat_pairs = out.repeat_pairs;
    rep.error = out.error.as_ref().map(|e| e.to_string());
    rep.counts = count_report(initial, &out.events, &out.config, params);
    let ledger = GenerationLedger::from_run(initial, &out.events);
    rep.key5 = check_key5(&ledger, params.eps);
    rep.max_generation = ledger.max_generation();
    if rep.events == 0 {
        rep.worst_dq_margin = 0.0;
        rep.worst_combined_margin = 0.0;
        rep.max_dl_ratio = 0.0;
    }
    (rep, out.events, out.config)
}

/// Seeded ensemble of random small-BV runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub law: GasLaw,
    pub nu: f64,
    pub delta: f64,
    pub eps: f64,
    pub jumps: usize,
    pub t_end: f64,
    pub runs: usize,
    pub seed: u64,
    pub limits: Key2Limits,
}

impl EnsembleSpec {
    pub fn new(law: GasLaw) -> EnsembleSpec {
        EnsembleSpec { law, nu: 1e-6, delta: 1e-2, eps: 0.05, jumps: 6, t_end: 1e7, runs: 200, seed: 0, limits: Key2Limits::default() }
    }

    pub fn params(&self, kappa: f64) -> Result<SchedulerParams> {
        let mut p = SchedulerParams::new(self.law, self.nu, self.delta, self.eps)?;
        p.kappa = kappa;
        Ok(p)
    }

    /// Seed of run `k`; calibration runs draw from a disjoint index range.
    pub fn run_seed(&self, k: usize, calibration: bool) -> u64 {
        let offset = if calibration { 1u64 << 32 } else { 0 };
        crate::numerics::splitmix64(self.seed, offset + k as u64)
    }
}

/// One ensemble member with the weight-decay check folded in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub seed: u64,
    pub report: RunReport,
    /// Largest weight-decay margin over the run's events (−∞ without events).
    pub worst_weight_margin: f64,
    pub weight_kappa_needed: f64,
    pub weight_failures: usize,
}

impl EnsembleRow {
    pub const HEADER: &'static str = "seed,events,passed,key1_failures,key2_failures,outcome_failures,worst_dq_margin,worst_combined_margin,kappa_needed,min_physical_over_rho,max_pseudo_over_rho,worst_pseudo_drop,worst_weight_margin,weight_kappa_needed,weight_failures,c_interactions,max_generation,error";

    pub fn passed(&self) -> bool {
        self.report.passed() && self.weight_failures == 0
    }

    pub fn to_record(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{},{:.6e},{},{}",
            self.seed,
            r.events,
            self.passed(),
            r.key1_failures,
            r.key2_failures,
            r.outcome_failures,
            r.worst_dq_margin,
            r.worst_combined_margin,
            r.kappa_needed,
            r.min_physical_over_rho,
            r.max_pseudo_over_rho,
            r.worst_pseudo_drop,
            self.worst_weight_margin,
            self.weight_kappa_needed,
            self.weight_failures,
            r.counts.c_interactions,
            r.max_generation,
            r.error.as_deref().unwrap_or("").replace(',', ";")
        )
    }
}

/// Runs one seeded member with the key checks and the weight-decay check.
pub fn ensemble_member(spec: &EnsembleSpec, seed: u64, kappa: f64, strict: bool) -> EnsembleRow {
    member(spec, seed, kappa, strict, true)
}

fn member(spec: &EnsembleSpec, seed: u64, kappa: f64, strict: bool, warn: bool) -> EnsembleRow {
    let failed = |e: Error| EnsembleRow {
        seed,
        report: RunReport {
            events: 0,
            initial_l: 0.0,
            max_l: 0.0,
            worst_dq_margin: 0.0,
            worst_combined_margin: 0.0,
            max_dl_ratio: 0.0,
            kappa_needed: 0.0,
            key1_failures: 0,
            min_physical_over_rho: 0.0,
            max_pseudo_over_rho: 0.0,
            max_rarefaction_over_delta: 0.0,
            worst_pseudo_drop: 0.0,
            key2_failures: 0,
            outcome_failures: 0,
            repeat_pairs: 0,
            counts: CountReport::default(),
            key5: Key5Report::default(),
            max_generation: 0,
            error: Some(e.to_string()),
        },
        worst_weight_margin: f64::NEG_INFINITY,
        weight_kappa_needed: 0.0,
        weight_failures: 0,
    };
    let params = match spec.params(kappa) {
        Ok(p) => p,
        Err(e) => return failed(e),
    };
    let initial = match random_small_bv(seed, spec.eps, spec.jumps, &params).and_then(|d| crate::fronttrack::init_approximation(&d, &params)) {
        Ok(c) => c,
        Err(e) => return failed(e),
    };
    let mut worst = f64::NEG_INFINITY;
    let mut needed: f64 = 0.0;
    let mut failures = 0;
    let (report, _, _) = run_checked(&initial, spec.t_end, &params, &spec.limits, strict, |_, ev| {
        let w = crate::contraction::weight_decay_check(ev, &params, kappa)?;
        worst = worst.max(w.worst_margin);
        needed = needed.max(w.kappa_needed);
        if !w.pass {
            failures += 1;
            if strict {
                return Err(Error::Monotonicity(format!("event {}: weight margin {:e} at x = {}", ev.index, w.worst_margin, w.worst_x)));
            }
            if warn {
                log::warn!("event {}: weight margin {:e} at x = {}", ev.index, w.worst_margin, w.worst_x);
            }
        }
        Ok(())
    });
    EnsembleRow { seed, report, worst_weight_margin: worst, weight_kappa_needed: needed, weight_failures: failures }
}

/// Twice the smallest κ meeting both the combined decay inequality and the
/// weight-decay inequality over the calibration runs.
pub fn calibrate_kappa(spec: &EnsembleSpec, runs: usize) -> Result<f64> {
    let rows: Vec<EnsembleRow> = (0..runs).into_par_iter().map(|k| member(spec, spec.run_seed(k, true), 1.0, false, false)).collect();
    if let Some(r) = rows.iter().find(|r| r.report.error.is_some()) {
        return Err(Error::Consistency(format!("calibration run {} failed: {}", r.seed, r.report.error.as_deref().unwrap_or(""))));
    }
    let k = rows.iter().map(|r| r.report.kappa_needed.max(r.weight_kappa_needed)).fold(0.0, f64::max);
    if !k.is_finite() {
        return Err(Error::Consistency("no finite kappa satisfies the calibration runs".into()));
    }
    Ok((2.0 * k).max(1e-3))
}

/// Runs the test seeds in parallel; rows keep seed order.
pub fn run_ensemble(spec: &EnsembleSpec, kappa: f64, strict: bool) -> Vec<EnsembleRow> {
    (0..spec.runs).into_par_iter().map(|k| ensemble_member(spec, spec.run_seed(k, false), kappa, strict)).collect()
}
