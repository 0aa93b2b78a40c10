//! Two shocks meeting head-on, tracked through the interaction with the
//! Glimm functionals before and after.

use wavefront::fronttrack::{evolve, init_approximation, SchedulerParams};
use wavefront::glimm::{check_key1, classify, functionals};
use wavefront::scenario::Preset;
use wavefront::thermo::GasLaw;

pub fn main() {
    let law = GasLaw::default();
    let params = SchedulerParams::new(law, 1e-6, 1e-2, 0.05).unwrap();
    let data = Preset::TwoShockHeadon { sigma: 0.02, gap: 50.0 }.step_data(&params).unwrap();
    let initial = init_approximation(&data, &params).unwrap();
    print!("{}", initial.to_columns());

    let out = evolve(initial, 100.0, &params, |_, _| Ok(()));
    if let Some(e) = out.error {
        eprintln!("run stopped: {e}");
        std::process::exit(3);
    }
    for ev in &out.events {
        let k1 = check_key1(ev, 1.0);
        println!(
            "event {} at t = {:.4}: {} ({}), dL = {:.3e}, dQ = {:.3e}, kappa needed {:.3e}",
            ev.index,
            ev.time,
            ev.tag.label(),
            classify(ev).label(),
            ev.delta_l(),
            ev.delta_q(),
            k1.kappa_needed
        );
    }
    let g = functionals(&out.config, &law);
    println!("final: {} fronts, L = {:.6}, Q = {:.3e}", out.config.fronts.len(), g.l, g.q);
    print!("{}", out.config.to_columns());
}
