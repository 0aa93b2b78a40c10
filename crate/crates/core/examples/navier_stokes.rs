//! Navier-Stokes from mollified Riemann data: energy balance and the
//! distance travelled by the viscous shock.

use wavefront::fronttrack::SchedulerParams;
use wavefront::ns_solver::{mollify_initial, run, NsParams};
use wavefront::scenario::Preset;
use wavefront::thermo::GasLaw;

pub fn main() {
    let law = GasLaw::default();
    let nu = 1e-2;
    let sp = SchedulerParams::new(law, nu, 1e-2, 1e-2).unwrap();
    let data = Preset::SingleShock { sigma: 0.1 }.step_data(&sp).unwrap();
    let mut params = NsParams::new(law, nu).unwrap();
    params.mesh = 0.5;
    let (mut field, m) = mollify_initial(&data, nu, -2.0, 2.0, params.dx(), &law).unwrap();
    println!("mollified data: L1 distance {:.3e}, entropy distance {:.3e}", m.l1_distance, m.entropy_distance);

    let diag = run(&mut field, 0.5, &params, |_, _| Ok(())).unwrap();
    println!("{} steps, {} halvings", diag.steps, diag.halvings);
    let last = diag.times.len() - 1;
    println!("entropy {:.6e} -> {:.6e}", diag.entropy_bd[0], diag.entropy_bd[last]);
    println!("largest balance defect {:.2e}", diag.max_abs_defect());

    // shock position: where v crosses the mean of the end states
    let mid = 0.5 * (field.v[0] + field.v[field.len() - 1]);
    let k = field.v.windows(2).position(|w| (w[0] - mid) * (w[1] - mid) <= 0.0).unwrap();
    println!("shock near x = {:.4}", field.x(k));
}
