//! Coarse inviscid-limit sweep for a single rarefaction.

use wavefront::fronttrack::SchedulerParams;
use wavefront::ns_solver::{inviscid_limit_experiment, LimitRow, LimitSetup};
use wavefront::scenario::Preset;
use wavefront::thermo::GasLaw;

pub fn main() {
    let law = GasLaw::default();
    let sp = SchedulerParams::new(law, 1e-2, 1e-2, 1e-2).unwrap();
    let data = Preset::SingleRarefaction { sigma: 0.1 }.step_data(&sp).unwrap();
    let setup = LimitSetup { law, delta: 5e-3, eps: 1e-2, kappa: 1.0, mesh: 1.0, t_end: 0.2, window: (-1.5, 1.5), samples: 5 };
    println!("{}", LimitRow::HEADER);
    for row in inviscid_limit_experiment(&data, &[4e-2, 2e-2, 1e-2], &setup) {
        println!("{}", row.to_record());
    }
}
