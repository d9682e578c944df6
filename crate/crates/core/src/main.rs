use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use gfdtd::io::snapshot::format_stability_report;
use gfdtd::io::RunConfig;
use gfdtd::scenario;
use gfdtd::stability::endpoint_condition;
use gfdtd::SolverError;

const EXIT_DIVERGED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "gfdtd", version, about = "G-FDTD Schrödinger solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write runlog.csv plus snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides run.out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the stability report for a configuration.
    Stability {
        #[arg(long)]
        config: PathBuf,
    },
    /// Scan stability over a range of mu.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mu_from: f64,
        #[arg(long)]
        mu_to: f64,
        #[arg(long)]
        mu_step: f64,
        /// Also run each configuration to find the empirical divergence threshold.
        #[arg(long)]
        simulate: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out_dir } => run(&config, out_dir),
        Command::Stability { config } => stability(&config),
        Command::Sweep {
            config,
            mu_from,
            mu_to,
            mu_step,
            simulate,
        } => sweep(&config, mu_from, mu_to, mu_step, simulate),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run(path: &Path, out_dir: Option<PathBuf>) -> Result<u8, SolverError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(dir) = out_dir {
        cfg.run.out_dir = dir;
    }
    let sc = cfg.scenario()?;
    let out = scenario::run(&sc)?;
    let last = out.log.last().expect("initial record is always present");
    match out.log.divergence_step {
        Some(step) => {
            println!("diverged at step {step}");
            println!("output written to {}", cfg.run.out_dir.display());
            Ok(EXIT_DIVERGED)
        }
        None => {
            println!(
                "completed {} steps; norm drift {:.3e}; final energy {:.3} eV",
                last.step,
                out.log.max_norm_drift(),
                last.energy_j / gfdtd::field::EV
            );
            println!("output written to {}", cfg.run.out_dir.display());
            Ok(0)
        }
    }
}

fn stability(path: &Path) -> Result<u8, SolverError> {
    let cfg = RunConfig::load(path)?;
    let sc = cfg.scenario()?;
    let report = sc.stability();
    print!("{}", format_stability_report(&report));
    let cfg_s = &sc.scheme;
    let potential_term = sc.barrier.height * cfg_s.dt() / (2.0 * cfg_s.physics().hbar());
    let (bare_value, bare_ok) = endpoint_condition(cfg_s, &sc.grid, 0.0, sc.stability_c);
    println!("potential_term = {potential_term:.6e}");
    println!(
        "endpoint_without_potential = {bare_value:.5} -> {}",
        if bare_ok { "stable" } else { "unstable" }
    );
    Ok(0)
}

fn sweep(path: &Path, from: f64, to: f64, step: f64, simulate: bool) -> Result<u8, SolverError> {
    let valid = step > 0.0 && from > 0.0 && to >= from;
    if !valid {
        return Err(SolverError::Config(
            "need 0 < --mu-from <= --mu-to and --mu-step > 0".into(),
        ));
    }
    let cfg = RunConfig::load(path)?;
    let base = cfg.scenario()?;
    let count = ((to - from) / step + 1e-9).floor() as usize;
    let mut first_scan = None;
    let mut first_threshold = None;
    let mut first_divergent = None;
    println!(
        "mu,endpoint,scan_max,verdict{}",
        if simulate { ",diverged_at" } else { "" }
    );
    for i in 0..=count {
        let mu = from + i as f64 * step;
        let mut sc = base.clone();
        sc.scheme = sc.scheme.with_mu(mu, &sc.grid)?;
        sc.out_dir = None;
        let r = sc.stability();
        if r.scan_max > 1.0 && first_scan.is_none() {
            first_scan = Some(mu);
        }
        if !r.verdict.is_stable() && first_threshold.is_none() {
            first_threshold = Some(mu);
        }
        let mut line = format!(
            "{mu:.6},{:.6},{:.6},{}",
            r.endpoint_value, r.scan_max, r.verdict
        );
        if simulate {
            let out = scenario::run(&sc)?;
            match out.log.divergence_step {
                Some(s) => {
                    line.push_str(&format!(",{s}"));
                    first_divergent.get_or_insert(mu);
                }
                None => line.push_str(",-"),
            }
        }
        println!("{line}");
    }
    let show = |v: Option<f64>| v.map_or("none".to_string(), |m| format!("{m:.6}"));
    println!("first_unstable_mu_scan = {}", show(first_scan));
    println!("first_mu_above_threshold_c = {}", show(first_threshold));
    if simulate {
        println!("first_divergent_mu_empirical = {}", show(first_divergent));
    }
    Ok(0)
}
