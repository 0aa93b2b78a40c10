//! Exact Riemann solution between two states, with the wave curves used to
//! rebuild the right state.

use wavefront::riemann::{rh_residual, solve_riemann, wave_by_size, Family, WaveKind};
use wavefront::thermo::{to_riemann, GasLaw, LagrangianState};

pub fn main() {
    let law = GasLaw::air();
    let left = LagrangianState::new(1.0, 0.2).unwrap();
    let right = LagrangianState::new(0.8, -0.3).unwrap();
    let (w1, w2) = solve_riemann(left, right, &law).unwrap();
    for w in [w1, w2] {
        let rh = if w.kind == WaveKind::Shock { rh_residual(w.left, w.right, &law) } else { 0.0 };
        println!("{}-{}: size {:+.6}, speed {:+.6}, RH residual {rh:.1e}", w.family.label(), w.kind.label(), w.size, w.speed);
    }
    println!("middle state: v = {:.6}, h = {:.6}", w1.right.v, w1.right.h);

    // walk the two wave curves back to the right state
    let m = wave_by_size(to_riemann(left, &law).unwrap(), Family::Backward, w1.size, &law).unwrap();
    let r = wave_by_size(m, Family::Forward, w2.size, &law).unwrap();
    println!("rebuilt right state off by {:.1e}", r.dist(&to_riemann(right, &law).unwrap()));
}
