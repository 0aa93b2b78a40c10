//! Command-line front door: TOML run configs, the experiment subcommands,
//! CSV output and the exit-code convention.
//!
//! Exit codes: 0 every check passed, 1 a check failed, 2 bad arguments or
//! config, 3 a numerical failure (vacuum, instability, non-convergence).

use crate::contraction::weight_decay_check;
use crate::error::{Error, Result};
use crate::fronttrack::{init_approximation, SchedulerParams};
use crate::glimm::Key2Limits;
use crate::ns_solver::{inviscid_limit_experiment, shock_contraction_run, LimitRow, LimitSetup, ShockContractionSetup};
use crate::profiles::{check_viscous_shock, viscous_shock_profile};
use crate::riemann::{rh_residual, solve_riemann, wave_by_size, Family, WaveKind};
use crate::scenario::{calibrate_kappa, reference_state, run_checked, run_ensemble, EnsembleRow, EnsembleSpec, Preset};
use crate::thermo::{from_riemann, to_riemann, GasLaw, LagrangianState};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

fn default_gamma() -> f64 {
    2.0
}
fn default_alpha() -> f64 {
    1.0
}
fn default_nu() -> f64 {
    1e-6
}
fn default_delta() -> f64 {
    1e-2
}
fn default_eps() -> f64 {
    0.05
}
fn default_mesh() -> f64 {
    0.125
}
fn default_t() -> f64 {
    1.0
}
fn default_scenario() -> Preset {
    Preset::SingleShock { sigma: 0.05 }
}
fn default_nus() -> Vec<f64> {
    vec![1e-2, 5e-3, 2.5e-3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "EnsembleConfig::default_runs")]
    pub runs: usize,
    #[serde(default = "EnsembleConfig::default_jumps")]
    pub jumps: usize,
    #[serde(default = "EnsembleConfig::default_calibration")]
    pub calibration_runs: usize,
    #[serde(default)]
    pub c_pseudo: Option<f64>,
}

impl EnsembleConfig {
    fn default_runs() -> usize {
        200
    }
    fn default_jumps() -> usize {
        6
    }
    fn default_calibration() -> usize {
        40
    }
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { runs: 200, jumps: 6, calibration_runs: 40, c_pseudo: None }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Calibrated by `verify` when absent.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_mesh")]
    pub mesh: f64,
    #[serde(rename = "T", default = "default_t")]
    pub t_end: f64,
    #[serde(default = "default_scenario")]
    pub scenario: Preset,
    /// Viscosities swept by `limit`.
    #[serde(default = "default_nus")]
    pub nus: Vec<f64>,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let c: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.law()?;
        if !(c.t_end > 0.0) || !(c.mesh > 0.0) {
            return Err(Error::Config(format!("need T > 0 and mesh > 0 (T = {}, mesh = {})", c.t_end, c.mesh)));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn law(&self) -> Result<GasLaw> {
        GasLaw::new(self.gamma, self.alpha)
    }

    pub fn scheduler(&self) -> Result<SchedulerParams> {
        let mut p = SchedulerParams::new(self.law()?, self.nu, self.delta, self.eps)?;
        p.kappa = self.kappa.unwrap_or(1.0);
        Ok(p)
    }

    pub fn ensemble_spec(&self, seed: u64) -> Result<EnsembleSpec> {
        let mut s = EnsembleSpec::new(self.law()?);
        s.nu = self.nu;
        s.delta = self.delta;
        s.eps = self.eps;
        s.jumps = self.ensemble.jumps;
        s.runs = self.ensemble.runs;
        s.seed = seed;
        if let Some(c) = self.ensemble.c_pseudo {
            s.limits = Key2Limits { c_pseudo: c, ..s.limits };
        }
        Ok(s)
    }
}

#[derive(Debug, Parser)]
#[command(name = "wavefront", version, about = "Front tracking, viscous profiles and Navier-Stokes desk experiments")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed for random scenarios.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for CSV output and the summary.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Stop at the first violated check.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one Riemann problem given as v,h pairs.
    Riemann {
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        left: LagrangianState,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        right: LagrangianState,
    },
    /// Front-track the configured scenario with the checks after every event.
    Evolve,
    /// Seeded ensemble of random small-BV runs.
    Verify,
    /// Viscous shock profile of the given size from the reference state.
    Profile {
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.1)]
        sigma: f64,
        #[arg(long, default_value = "backward")]
        family: String,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Navier-Stokes runs against the dressed front-tracking solution.
    Limit,
    /// Weighted relative entropy along a perturbed viscous shock.
    ContractionCheck {
        #[arg(long, default_value_t = 1e-2)]
        perturbation: f64,
        /// Allowed total increase of F, relative to F(0).
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

fn parse_state(s: &str) -> std::result::Result<LagrangianState, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected v,h but got '{s}'"));
    }
    let v: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let h: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok(LagrangianState { v, h })
}

fn parse_family(s: &str) -> Result<Family> {
    match s {
        "backward" | "1" => Ok(Family::Backward),
        "forward" | "2" => Ok(Family::Forward),
        _ => Err(Error::Config(format!("unknown family '{s}'"))),
    }
}

/// Machine-readable result of one command, written as summary.toml.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub passed: bool,
    pub exit_code: i32,
    pub message: String,
    pub values: BTreeMap<String, String>,
}

impl Summary {
    fn new(command: &str) -> Summary {
        Summary { command: command.into(), passed: true, ..Default::default() }
    }

    fn set(&mut self, key: &str, v: impl ToString) {
        self.values.insert(key.into(), v.to_string());
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.passed = false;
        self.exit_code = EXIT_CHECK;
        self.message = msg.into();
    }
}

pub fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) => EXIT_USAGE,
        Error::Monotonicity(_) => EXIT_CHECK,
        _ => EXIT_NUMERICAL,
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), body)?;
    Ok(())
}

fn cmd_riemann(law: &GasLaw, l: LagrangianState, r: LagrangianState, out: &mut String, sum: &mut Summary) -> Result<()> {
    for s in [l, r] {
        LagrangianState::new(s.v, s.h).map_err(|e| Error::Config(e.to_string()))?;
    }
    let (w1, w2) = solve_riemann(l, r, law)?;
    let _ = writeln!(out, "middle state: v = {:.12e}, h = {:.12e}", w1.right.v, w1.right.h);
    let mut worst: f64 = 0.0;
    for w in [w1, w2] {
        let rh = if w.kind == WaveKind::Shock { rh_residual(w.left, w.right, law) } else { 0.0 };
        worst = worst.max(rh);
        let _ = writeln!(out, "{} {}: size {:.12e}, speed {:.12e}, RH residual {:.3e}", w.family.label(), w.kind.label(), w.size, w.speed, rh);
    }
    sum.set("middle_v", w1.right.v);
    sum.set("middle_h", w1.right.h);
    sum.set("sigma_backward", w1.size);
    sum.set("sigma_forward", w2.size);
    sum.set("rh_residual", worst);
    Ok(())
}

fn cmd_evolve(cfg: &RunConfig, strict: bool, dir: &Path, sum: &mut Summary) -> Result<()> {
    let params = cfg.scheduler()?;
    let data = cfg.scenario.step_data(&params)?;
    let initial = init_approximation(&data, &params)?;
    let kappa = params.kappa;
    let mut weight_failures = 0;
    let mut worst_weight = f64::NEG_INFINITY;
    let (rep, events, last) = run_checked(&initial, cfg.t_end, &params, &Key2Limits::default(), strict, |_, ev| {
        let w = weight_decay_check(ev, &params, kappa)?;
        worst_weight = worst_weight.max(w.worst_margin);
        if !w.pass {
            weight_failures += 1;
        }
        Ok(())
    });
    let mut log = String::from(crate::fronttrack::InteractionEvent::HEADER);
    log.push('\n');
    for e in &events {
        log.push_str(&e.to_record());
        log.push('\n');
    }
    write_file(dir, "events.csv", &log)?;
    write_file(dir, "fronts_initial.csv", &initial.to_columns())?;
    write_file(dir, "fronts_final.csv", &last.to_columns())?;
    sum.set("events", rep.events);
    sum.set("kappa", kappa);
    sum.set("worst_combined_margin", rep.worst_combined_margin);
    sum.set("worst_weight_margin", worst_weight);
    sum.set("kappa_needed", rep.kappa_needed);
    if let Some(e) = &rep.error {
        sum.fail(e.clone());
        sum.exit_code = EXIT_NUMERICAL;
    } else if !rep.passed() || weight_failures > 0 {
        sum.fail(format!(
            "{} decay, {} window, {} outcome and {} weight violations",
            rep.key1_failures, rep.key2_failures, rep.outcome_failures, weight_failures
        ));
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, seed: u64, strict: bool, dir: &Path, sum: &mut Summary) -> Result<()> {
    let spec = cfg.ensemble_spec(seed)?;
    let kappa = match cfg.kappa {
        Some(k) => k,
        None => calibrate_kappa(&spec, cfg.ensemble.calibration_runs)?,
    };
    let rows = run_ensemble(&spec, kappa, strict);
    let mut csv = String::from(EnsembleRow::HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_record());
        csv.push('\n');
    }
    write_file(dir, "ensemble.csv", &csv)?;
    let failed = rows.iter().filter(|r| !r.passed()).count();
    let events: usize = rows.iter().map(|r| r.report.events).sum();
    sum.set("runs", rows.len());
    sum.set("kappa", kappa);
    sum.set("events", events);
    sum.set("failed_runs", failed);
    sum.set("worst_weight_margin", rows.iter().map(|r| r.worst_weight_margin).fold(f64::NEG_INFINITY, f64::max));
    sum.set("max_pseudo_over_rho", rows.iter().map(|r| r.report.max_pseudo_over_rho).fold(0.0, f64::max));
    if failed > 0 {
        sum.fail(format!("{failed} of {} runs violated a check", rows.len()));
    }
    Ok(())
}

fn cmd_profile(cfg: &RunConfig, sigma: f64, family: &str, samples: usize, dir: &Path, sum: &mut Summary) -> Result<()> {
    let law = cfg.law()?;
    let family = parse_family(family)?;
    if !(sigma < 0.0) {
        return Err(Error::Config(format!("a shock needs sigma < 0, got {sigma}")));
    }
    let l = reference_state();
    let r = from_riemann(wave_by_size(to_riemann(l, &law)?, family, sigma, &law)?, &law)?;
    let rep = check_viscous_shock(l, r, family, &law)?;
    let p = viscous_shock_profile(l, r, family, 1.0, &law)?;
    let mut csv = String::from("xi,v,h\n");
    for row in p.export(samples) {
        let _ = writeln!(csv, "{:.12e},{:.12e},{:.12e}", row[0], row[1], row[2]);
    }
    write_file(dir, "profile.csv", &csv)?;
    sum.set("speed", p.speed);
    sum.set("endpoint_error", rep.endpoint_error);
    sum.set("monotone", rep.monotone);
    sum.set("residual_order", rep.residual_order);
    sum.set("tail_rate_fit", rep.tail.rate_fit);
    sum.set("tail_rate_linear", rep.tail.rate_linear);
    if !rep.pass() {
        sum.fail(format!("profile checks failed: {rep:?}"));
    }
    Ok(())
}

/// Strictly decreasing in the row order, which runs from large to small ν.
pub fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

pub const PLOT_SCRIPT: &str = r#"import csv, sys
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open(sys.argv[1] if len(sys.argv) > 1 else "limit.csv")))
nu = [float(r["nu"]) for r in rows]
fig, ax = plt.subplots()
for key in ("l1_distance", "sup_f", "int_g"):
    ax.loglog(nu, [float(r[key]) for r in rows], "o-", label=key)
ax.set_xlabel("nu")
ax.legend()
fig.savefig("limit.png", dpi=150)
"#;

fn cmd_limit(cfg: &RunConfig, dir: &Path, sum: &mut Summary) -> Result<()> {
    let params = cfg.scheduler()?;
    let data = cfg.scenario.step_data(&params)?;
    let setup = LimitSetup {
        law: params.law,
        delta: cfg.delta,
        eps: cfg.eps,
        kappa: params.kappa,
        mesh: cfg.mesh,
        t_end: cfg.t_end,
        window: (data.jumps[0] - 2.0, data.jumps[data.jumps.len() - 1] + 2.0),
        samples: 11,
    };
    let rows = inviscid_limit_experiment(&data, &cfg.nus, &setup);
    let mut csv = String::from(LimitRow::HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_record());
        csv.push('\n');
    }
    write_file(dir, "limit.csv", &csv)?;
    write_file(dir, "plot_limit.py", PLOT_SCRIPT)?;
    let col = |f: fn(&LimitRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let trends = [("l1_distance", col(|r| r.l1_distance)), ("sup_f", col(|r| r.sup_f)), ("int_g", col(|r| r.int_g))];
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    sum.set("rows", rows.len());
    sum.set("failed_rows", errors);
    let mut bad = Vec::new();
    for (name, xs) in &trends {
        let ok = strictly_decreasing(xs);
        sum.set(&format!("{name}_decreasing"), ok);
        if !ok {
            bad.push(*name);
        }
    }
    if errors > 0 {
        sum.fail(format!("{errors} rows failed"));
        sum.exit_code = EXIT_NUMERICAL;
    } else if !bad.is_empty() {
        sum.fail(format!("not strictly decreasing in nu: {}", bad.join(", ")));
    }
    Ok(())
}

fn cmd_contraction(cfg: &RunConfig, perturbation: f64, tol: f64, dir: &Path, sum: &mut Summary) -> Result<()> {
    if cfg.nu < 1e-4 {
        return Err(Error::Config(format!("contraction-check resolves the viscous scale on a grid of step mesh*nu; set nu >= 1e-4 in the config (got {:e})", cfg.nu)));
    }
    let mut setup = ShockContractionSetup::new(cfg.law()?);
    setup.nu = cfg.nu;
    setup.mesh = cfg.mesh;
    setup.t_end = cfg.t_end;
    setup.perturbation = perturbation;
    if let Preset::SingleShock { sigma } = cfg.scenario {
        setup.sigma = -sigma.abs();
    }
    let trace = shock_contraction_run(&setup)?;
    let mut csv = String::from("t,f,shift\n");
    for k in 0..trace.times.len() {
        let _ = writeln!(csv, "{:.12e},{:.12e},{:.12e}", trace.times[k], trace.f[k], trace.shift[k]);
    }
    write_file(dir, "contraction.csv", &csv)?;
    let f0 = trace.f[0];
    sum.set("f_initial", f0);
    sum.set("f_final", trace.f[trace.f.len() - 1]);
    sum.set("defect", trace.defect());
    sum.set("energy_excess", trace.diagnostics.max_excess());
    if trace.defect() > tol * f0 {
        sum.fail(format!("F increased by {:e} in total", trace.defect()));
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("WAVEFRONT_LOG", "warn")).try_init();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            log::warn!("thread pool already set: {e}");
        }
    }
    execute(&cli)
}

/// Runs a parsed command; the summary is written even when it fails.
pub fn execute(cli: &Cli) -> i32 {
    let name = match &cli.command {
        Command::Riemann { .. } => "riemann",
        Command::Evolve => "evolve",
        Command::Verify => "verify",
        Command::Profile { .. } => "profile",
        Command::Limit => "limit",
        Command::ContractionCheck { .. } => "contraction-check",
    };
    let mut sum = Summary::new(name);
    let mut text = String::new();
    let dir = cli.out_dir.as_path();
    let res = (|| -> Result<()> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        match &cli.command {
            Command::Riemann { left, right } => cmd_riemann(&cfg.law()?, *left, *right, &mut text, &mut sum),
            Command::Evolve => cmd_evolve(&cfg, cli.strict, dir, &mut sum),
            Command::Verify => cmd_verify(&cfg, cli.seed, cli.strict, dir, &mut sum),
            Command::Profile { sigma, family, samples } => cmd_profile(&cfg, *sigma, family, *samples, dir, &mut sum),
            Command::Limit => cmd_limit(&cfg, dir, &mut sum),
            Command::ContractionCheck { perturbation, tol } => cmd_contraction(&cfg, *perturbation, *tol, dir, &mut sum),
        }
    })();
    if let Err(e) = res {
        sum.passed = false;
        sum.exit_code = exit_code_of(&e);
        sum.message = e.to_string();
    }
    print!("{text}");
    for (k, v) in &sum.values {
        println!("{k} = {v}");
    }
    println!("{}: {}{}", sum.command, if sum.passed { "PASS" } else { "FAIL" }, if sum.message.is_empty() { String::new() } else { format!(" ({})", sum.message) });
    let body = toml::to_string(&sum).unwrap_or_default();
    if let Err(e) = write_file(dir, "summary.toml", &body) {
        eprintln!("cannot write summary: {e}");
        if sum.exit_code == EXIT_OK {
            return EXIT_USAGE;
        }
    }
    sum.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!((c.gamma, c.alpha, c.nu, c.t_end), (2.0, 1.0, 1e-6, 1.0));
        assert_eq!(c.scenario, Preset::SingleShock { sigma: 0.05 });
    }

    #[test]
    fn config_reads_nested_scenario() {
        let c = RunConfig::from_toml("gamma = 1.4\nalpha = 0.4\nT = 2.0\n[scenario]\nkind = \"two-shock-headon\"\nsigma = 0.03\ngap = 1.0\n").unwrap();
        assert_eq!(c.t_end, 2.0);
        assert_eq!(c.scenario, Preset::TwoShockHeadon { sigma: 0.03, gap: 1.0 });
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(RunConfig::from_toml("gama = 2.0").is_err());
        assert!(RunConfig::from_toml("gamma = 0.5").is_err());
        assert!(RunConfig::from_toml("T = -1.0").is_err());
    }

    #[test]
    fn states_parse_from_pairs() {
        assert_eq!(parse_state("1.5,-0.25").unwrap(), LagrangianState { v: 1.5, h: -0.25 });
        assert!(parse_state("1.5").is_err());
    }

    #[test]
    fn strictly_decreasing_rejects_ties() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn config_values_survive_parsing(nu in 1e-10f64..0.5, delta in 1e-4f64..0.5, eps in 1e-4f64..1.0, t in 1e-3f64..1e8) {
                let text = format!("nu = {nu:e}\ndelta = {delta:e}\neps = {eps:e}\nT = {t:e}\n");
                let c = RunConfig::from_toml(&text).unwrap();
                prop_assert_eq!((c.nu, c.delta, c.eps, c.t_end), (nu, delta, eps, t));
                prop_assert!(c.scheduler().is_ok());
            }

            #[test]
            fn nonpositive_horizon_is_rejected(t in -1e3f64..=0.0) {
                let text = format!("T = {t:e}");
                prop_assert!(RunConfig::from_toml(&text).is_err());
            }
        }
    }
}
