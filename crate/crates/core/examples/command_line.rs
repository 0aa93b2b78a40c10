//! Drive the command-line front end from code: write a config, run
//! `evolve` into a scratch directory and read back the summary.

use wavefront::cli::{run_cli, Summary};

pub fn main() {
    let dir = std::env::temp_dir().join(format!("wavefront-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("headon.toml");
    std::fs::write(&config, "T = 100.0\nkappa = 4.0\n\n[scenario]\nkind = \"two-shock-headon\"\nsigma = 0.02\ngap = 50.0\n").unwrap();

    let code = run_cli(["wavefront", "evolve", "--config", config.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    let summary: Summary = toml::from_str(&std::fs::read_to_string(dir.join("summary.toml")).unwrap()).unwrap();
    println!("exit code {code}, passed {}, events {}", summary.passed, summary.values["events"]);
    println!("{}", std::fs::read_to_string(dir.join("events.csv")).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}
