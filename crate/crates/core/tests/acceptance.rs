//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use wavefront::fronttrack::SchedulerParams;
use wavefront::glimm::smallness;
use wavefront::ns_solver::{inviscid_limit_experiment, mollify_initial, run, shock_contraction_run, LimitRow, LimitSetup, NsParams, ShockContractionSetup};
use wavefront::profiles::check_viscous_shock;
use wavefront::riemann::{phi_bwd, phi_fwd, rh_residual, solve_riemann, wave_by_size, Family, WaveKind};
use wavefront::scenario::{calibrate_kappa, reference_state, run_ensemble, EnsembleRow, EnsembleSpec, Preset};
use wavefront::thermo::{from_riemann, to_riemann, GasLaw, LagrangianState};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn riemann_battery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut mid, mut rh, mut phi) = (0.0f64, 0.0f64, 0.0f64);
    let mut errors = 0;
    for k in 0..10_000 {
        let law = if k % 2 == 0 { GasLaw::air() } else { GasLaw::default() };
        let ul = LagrangianState { v: rng.gen_range(0.5..=2.0), h: rng.gen_range(-1.0..=1.0) };
        let ur = LagrangianState { v: rng.gen_range(0.5..=2.0), h: rng.gen_range(-1.0..=1.0) };
        let Ok((a, b)) = solve_riemann(ul, ur, &law) else {
            errors += 1;
            continue;
        };
        let lc = to_riemann(ul, &law).unwrap();
        let rc = to_riemann(ur, &law).unwrap();
        let mc = wave_by_size(lc, Family::Backward, a.size, &law).unwrap();
        let end = wave_by_size(mc, Family::Forward, b.size, &law).unwrap();
        mid = mid.max(mc.dist(&to_riemann(a.right, &law).unwrap())).max(end.dist(&rc));
        for w in [a, b] {
            if w.kind == WaveKind::Shock {
                rh = rh.max(rh_residual(w.left, w.right, &law));
            }
        }
        let x = law.z(a.right.v) / law.z(ul.v);
        let f = phi_fwd(x, &law).unwrap();
        phi = phi.max((f + x * phi_bwd(1.0 / x, &law).unwrap()).abs() / (1.0 + f.abs()));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        errors == 0 && mid < 1e-10 && rh < 1e-10 && phi < 1e-12 && secs < 10.0,
        format!("10^4 pairs, middle residual {mid:.2e}, RH {rh:.2e}, phi identity {phi:.2e}, {errors} errors, {secs:.2} s"),
    )
}

struct Ensemble {
    nu: f64,
    kappa: f64,
    rows: Vec<EnsembleRow>,
    secs: f64,
}

fn ensemble(nu: f64) -> Ensemble {
    let start = Instant::now();
    let mut spec = EnsembleSpec::new(GasLaw::default());
    spec.nu = nu;
    spec.seed = 2024;
    let kappa = calibrate_kappa(&spec, 40).expect("calibration runs");
    let rows = run_ensemble(&spec, kappa, false);
    Ensemble { nu, kappa, rows, secs: start.elapsed().as_secs_f64() }
}

fn glimm_decay(e: &Ensemble) -> Outcome {
    let key1: usize = e.rows.iter().map(|r| r.report.key1_failures).sum();
    let errors = e.rows.iter().filter(|r| r.report.error.is_some()).count();
    let events: usize = e.rows.iter().map(|r| r.report.events).sum();
    let dq = e.rows.iter().map(|r| r.report.worst_dq_margin).fold(f64::NEG_INFINITY, f64::max);
    let comb = e.rows.iter().map(|r| r.report.worst_combined_margin).fold(f64::NEG_INFINITY, f64::max);
    outcome(
        key1 == 0 && errors == 0 && e.secs < 300.0,
        format!(
            "{} runs, {events} events, calibrated kappa {:.3}, worst dQ margin {dq:.2e}, worst combined margin {comb:.2e}, {key1} violations, {errors} run errors, {:.1} s",
            e.rows.len(),
            e.kappa,
            e.secs
        ),
    )
}

fn strength_window(a: &Ensemble, b: &Ensemble) -> Outcome {
    let min_phys = |e: &Ensemble| e.rows.iter().map(|r| r.report.min_physical_over_rho).fold(f64::INFINITY, f64::min);
    let c_np = |e: &Ensemble| e.rows.iter().map(|r| r.report.max_pseudo_over_rho).fold(0.0, f64::max);
    let drop = |e: &Ensemble| e.rows.iter().map(|r| r.report.worst_pseudo_drop).fold(0.0, f64::min);
    let (ca, cb) = (c_np(a), c_np(b));
    let stable = ca > 0.0 && (cb / ca - 1.0).abs() <= 0.25;
    let floor = 1.0 - 1e-9;
    outcome(
        min_phys(a) >= floor && min_phys(b) >= floor && stable && drop(a) >= 0.0 && drop(b) >= 0.0,
        format!(
            "min physical |sigma|/rho {:.6} / {:.6}, fitted C_np {ca:.4} at nu={:e} and {cb:.4} at nu={:e}, worst h drop across NP {:e}",
            min_phys(a),
            min_phys(b),
            a.nu,
            b.nu,
            drop(a).min(drop(b))
        ),
    )
}

fn counting(a: &Ensemble, b: &Ensemble) -> Outcome {
    let fit = |e: &Ensemble| e.rows.iter().map(|r| r.report.counts.c_interactions).fold(0.0, f64::max);
    let (ca, cb) = (fit(a), fit(b));
    let c = ca.max(cb);
    let all_bounded = a.rows.iter().chain(&b.rows).all(|r| r.report.events as f64 <= c * r.report.counts.scale.powi(3) * (1.0 + 1e-12));
    let nus = [1e-3, 1e-6, 1e-9];
    let s: Vec<f64> = nus.iter().map(|&nu: &f64| smallness(nu.cbrt(), nu.powf(1.0 / 240.0))).collect();
    let decreasing = s.windows(2).all(|w| w[1] < w[0]);
    outcome(
        c > 0.0 && all_bounded && decreasing,
        format!("single C = {c:.3e} (per-nu fits {ca:.3e}, {cb:.3e}), smallness at nu=1e-3,1e-6,1e-9: {:.4}, {:.4}, {:.4}", s[0], s[1], s[2]),
    )
}

fn shock_profiles() -> Outcome {
    let mut worst_secs: f64 = 0.0;
    let mut worst_order = f64::INFINITY;
    let mut worst_tail: f64 = 0.0;
    let mut worst_end: f64 = 0.0;
    let mut failed = Vec::new();
    for law in [GasLaw::default(), GasLaw::air()] {
        for family in [Family::Backward, Family::Forward] {
            for sigma in [-0.01, -0.1, -0.5] {
                let l = reference_state();
                let r = from_riemann(wave_by_size(to_riemann(l, &law).unwrap(), family, sigma, &law).unwrap(), &law).unwrap();
                let start = Instant::now();
                let rep = check_viscous_shock(l, r, family, &law).unwrap();
                let secs = start.elapsed().as_secs_f64();
                worst_secs = worst_secs.max(secs);
                worst_order = worst_order.min(rep.residual_order);
                worst_tail = worst_tail.max(rep.tail.relative_error());
                worst_end = worst_end.max(rep.endpoint_error);
                if !rep.pass() || secs >= 1.0 {
                    failed.push(format!("gamma {} {} {sigma}", law.gamma, family.label()));
                }
            }
        }
    }
    outcome(
        failed.is_empty(),
        format!(
            "12 profiles, endpoint error {worst_end:.2e}, lowest residual order {worst_order:.3}, tail error {:.1}%, slowest {worst_secs:.3} s{}",
            100.0 * worst_tail,
            if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join("; ")) }
        ),
    )
}

fn weight_decay(e: &Ensemble) -> Outcome {
    let failures: usize = e.rows.iter().map(|r| r.weight_failures).sum();
    let worst = e.rows.iter().map(|r| r.worst_weight_margin).fold(f64::NEG_INFINITY, f64::max);
    let needed = e.rows.iter().map(|r| r.weight_kappa_needed).fold(0.0, f64::max);
    outcome(failures == 0 && worst < 0.0, format!("worst margin {worst:.3e}, largest kappa needed {needed:.3}, {failures} violations"))
}

struct NsRuns {
    excess: Vec<(String, f64)>,
}

fn a_contraction(ns: &mut NsRuns) -> Outcome {
    let start = Instant::now();
    let mut defects = Vec::new();
    let mut last = String::new();
    for mesh in [0.5, 0.25] {
        let mut s = ShockContractionSetup::new(GasLaw::default());
        s.mesh = mesh;
        match shock_contraction_run(&s) {
            Ok(t) => {
                defects.push(t.defect());
                ns.excess.push((format!("perturbed shock, mesh {mesh}"), t.diagnostics.max_excess()));
                last = format!("F from {:.4e} to {:.4e}, shift {:.3e}", t.f[0], t.f[t.f.len() - 1], t.shift[t.shift.len() - 1]);
            }
            Err(e) => return outcome(false, format!("run at mesh {mesh} failed: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let shrinks = defects[1] <= 0.5 * defects[0];
    outcome(shrinks && secs < 300.0, format!("defects {:.3e} (dx = nu/2) and {:.3e} (dx = nu/4), {last}, {secs:.1} s", defects[0], defects[1]))
}

fn inviscid_limit(ns: &mut NsRuns) -> Outcome {
    let start = Instant::now();
    let law = GasLaw::default();
    let params = SchedulerParams::new(law, 1e-2, 2e-3, 1e-2).unwrap();
    let setup = LimitSetup { law, delta: 2e-3, eps: 1e-2, kappa: 1.0, mesh: 0.25, t_end: 0.5, window: (-2.0, 2.0), samples: 11 };
    let nus = [1e-2, 5e-3, 2.5e-3];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, preset) in [("shock", Preset::SingleShock { sigma: 0.1 }), ("rarefaction", Preset::SingleRarefaction { sigma: 0.1 })] {
        let data = preset.step_data(&params).unwrap();
        let rows = inviscid_limit_experiment(&data, &nus, &setup);
        let dec = |f: fn(&LimitRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
        let ok = rows.iter().all(|r| r.error.is_none()) && dec(|r| r.l1_distance) && dec(|r| r.sup_f) && dec(|r| r.int_g);
        pass &= ok;
        for r in &rows {
            ns.excess.push((format!("{name} limit, nu {:e}", r.nu), r.energy_excess));
        }
        let cols = |f: fn(&LimitRow) -> f64| rows.iter().map(|r| format!("{:.3e}", f(r))).collect::<Vec<_>>().join(" > ");
        parts.push(format!("{name}: L1 {}, sup F {}, int G {}", cols(|r| r.l1_distance), cols(|r| r.sup_f), cols(|r| r.int_g)));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(pass && secs < 1800.0, format!("{}; {secs:.1} s", parts.join("; ")))
}

fn energy(ns: &NsRuns) -> Outcome {
    let law = GasLaw::default();
    let params = SchedulerParams::new(law, 1e-2, 1e-2, 1e-2).unwrap();
    let mut ratios = Vec::new();
    for preset in [Preset::SingleShock { sigma: 0.1 }, Preset::SingleRarefaction { sigma: 0.1 }] {
        let data = preset.step_data(&params).unwrap();
        let defect = |mesh: f64| {
            let mut np = NsParams::new(law, 1e-2).unwrap();
            np.mesh = mesh;
            np.sample_every = 1;
            let (mut f, _) = mollify_initial(&data, 1e-2, -2.0, 2.0, np.dx(), &law).unwrap();
            run(&mut f, 0.25, &np, |_, _| Ok(())).unwrap().max_abs_defect()
        };
        ratios.push(defect(0.25) / defect(0.125));
    }
    let tol = 1e-8;
    let worst = ns.excess.iter().map(|e| e.1).fold(0.0, f64::max);
    let bad: Vec<&str> = ns.excess.iter().filter(|e| !(e.1 <= tol)).map(|e| e.0.as_str()).collect();
    outcome(
        bad.is_empty() && ratios.iter().all(|&r| r >= 3.5),
        format!(
            "{} runs, largest excess {worst:.2e} (limit {tol:e}), defect ratio under halving {:.2} (shock) and {:.2} (rarefaction){}",
            ns.excess.len(),
            ratios[0],
            ratios[1],
            if bad.is_empty() { String::new() } else { format!(", over limit: {}", bad.join("; ")) }
        ),
    )
}

fn main() {
    let total = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!("criterion {n} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    report(1, "exact Riemann solver", riemann_battery());
    let e6 = ensemble(1e-6);
    let e9 = ensemble(1e-9);
    report(2, "Glimm decay", glimm_decay(&e6));
    report(3, "strength window", strength_window(&e6, &e9));
    report(4, "counting", counting(&e6, &e9));
    report(5, "viscous shock profile", shock_profiles());
    report(6, "weight decay at interactions", weight_decay(&e6));
    let mut ns = NsRuns { excess: Vec::new() };
    report(7, "single-shock a-contraction", a_contraction(&mut ns));
    report(8, "inviscid limit trend", inviscid_limit(&mut ns));
    report(9, "energy inequalities", energy(&ns));
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria passed in {:.1} s", results.len() - failed.len(), results.len(), total.elapsed().as_secs_f64());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
