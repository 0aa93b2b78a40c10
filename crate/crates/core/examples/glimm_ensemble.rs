//! A small seeded ensemble: calibrate kappa on one set of seeds, then run
//! the key checks and the weight-decay check on another.

use wavefront::scenario::{calibrate_kappa, run_ensemble, EnsembleRow, EnsembleSpec};
use wavefront::thermo::GasLaw;

pub fn main() {
    let mut spec = EnsembleSpec::new(GasLaw::default());
    spec.runs = 12;
    spec.seed = 7;
    let kappa = calibrate_kappa(&spec, 8).unwrap();
    println!("calibrated kappa = {kappa:.4}");
    let rows = run_ensemble(&spec, kappa, false);
    println!("{}", EnsembleRow::HEADER);
    for r in &rows {
        println!("{}", r.to_record());
    }
    let failed = rows.iter().filter(|r| !r.passed()).count();
    println!("{failed} of {} runs failed a check", rows.len());
}
