//! Dress a front-tracking configuration with viscous profiles and measure
//! a perturbed state against it: weight, weighted relative entropy, Y and G.

use wavefront::contraction::{build_weights, g_functional, weight_base, weighted_entropy, y_functional, UniformField};
use wavefront::fronttrack::{init_approximation, SchedulerParams};
use wavefront::profiles::profiles_of;
use wavefront::scenario::Preset;
use wavefront::thermo::GasLaw;

pub fn main() {
    let law = GasLaw::default();
    let nu = 1e-3;
    let params = SchedulerParams::new(law, nu, 0.1, 1e-2).unwrap();
    let data = Preset::ShockRarefactionOvertake { shock: 0.05, rarefaction: 0.02, gap: 8.0 }.step_data(&params).unwrap();
    let config = init_approximation(&data, &params).unwrap();
    let profiles = profiles_of(&config, nu, params.rho(), &law).unwrap();
    println!("{} fronts dressed: {:?}", profiles.len(), profiles.iter().map(|p| p.kind.label()).collect::<Vec<_>>());

    let (x0, dx, n) = (-2.0, 2e-3, 6001);
    let dressed = UniformField::from_profiles(&config, &profiles, x0, dx, n).unwrap();
    let mut u = dressed.clone();
    for k in 0..n {
        let x = u.x(k);
        u.v[k] += 1e-3 * (-(x * x) / 0.01).exp();
    }
    let w = build_weights(&dressed, &profiles, weight_base(&config, 1.0, &law), params.eps.sqrt()).unwrap();
    let amin = w.a.iter().copied().fold(f64::INFINITY, f64::min);
    let amax = w.a.iter().copied().fold(0.0, f64::max);
    println!("weight in [{amin:.4}, {amax:.4}] with {} weighted shocks", w.shocks.len());
    println!("F = {:.4e}", weighted_entropy(&u, &dressed, &w.a, &law).unwrap());
    println!("Y = {:.4e}", y_functional(&u, &dressed, &w, 0, &profiles, &law).unwrap());
    let g = g_functional(&u, &dressed, &profiles, nu, &law).unwrap();
    println!("G = {:.4e} (diffusion {:.3e} + {:.3e}, waves {:.3e})", g.total(), g.diffusion_mu1, g.diffusion_mu2, g.wave_term);
}
