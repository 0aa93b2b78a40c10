//! Viscous shock profile: checks, tail rate and a few samples.

use wavefront::profiles::{check_viscous_shock, viscous_shock_profile};
use wavefront::riemann::{wave_by_size, Family};
use wavefront::thermo::{from_riemann, to_riemann, GasLaw, LagrangianState};

pub fn main() {
    let law = GasLaw::default();
    let left = LagrangianState::new(1.0, 0.0).unwrap();
    let right = from_riemann(wave_by_size(to_riemann(left, &law).unwrap(), Family::Backward, -0.1, &law).unwrap(), &law).unwrap();

    let rep = check_viscous_shock(left, right, Family::Backward, &law).unwrap();
    println!("endpoint error {:.1e}, monotone {}, residual order {:.3}", rep.endpoint_error, rep.monotone, rep.residual_order);
    println!("tail rate {:.5} (linearised {:.5}), checks pass: {}", rep.tail.rate_fit, rep.tail.rate_linear, rep.pass());

    let nu = 1e-2;
    let p = viscous_shock_profile(left, right, Family::Backward, nu, &law).unwrap();
    println!("speed {:.6}, profile reaches 1e-8 of its endpoints within {:.3}", p.speed, p.reach(1e-8));
    println!("x,v,h");
    for k in -5..=5 {
        let x = 0.1 * k as f64;
        let s = p.state(x);
        println!("{x:+.2},{:.8},{:.8}", s.v, s.h);
    }
}
