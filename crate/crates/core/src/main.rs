use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nse_nudge::harness::{compute_stats, load_config, run_experiment, ExperimentConfig, RunMode, RunSummary};
use nse_nudge::Error;

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Parser)]
#[command(name = "nse-nudge", version, about = "Viscosity recovery twin experiments for 2D Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by the config.
    Run { config: PathBuf },
    /// Run the spectral invariant suites on the config's grid.
    Verify { config: PathBuf },
    /// Print force statistics and the gain-condition report.
    Stats { config: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigParse { .. } | Error::ConfigValidation(_) => EXIT_CONFIG,
        Error::BlowUp { .. } => EXIT_BLOWUP,
        _ => EXIT_OTHER,
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, Error> {
    let mut cfg = load_config(path)?;
    cfg.apply_env_overrides();
    Ok(cfg)
}

fn report(s: &RunSummary) {
    println!("mode        {}", s.mode.as_str());
    println!("output      {}", s.output_dir.display());
    println!("records     {}", s.records);
    if let Some(sp) = &s.spin_up {
        println!("spin-up     |u|_H1 = {:.6e}, R1 = {:.6e}, inside = {}", sp.final_h1, sp.r1, sp.inside_ball);
    }
    if let Some(sy) = &s.sync {
        let rate = sy.fitted_rate.map_or("n/a".to_string(), |r| format!("{r:.4}"));
        println!("sync        {:.2} orders of P decay, rate {rate}, monotone = {}", sy.orders_of_decay, sy.monotone);
    }
    if let Some(e) = &s.estimation {
        println!(
            "estimator   {} accepted of {} attempts, nu = {:.12e}, rel. error = {:.3e}",
            e.accepted_updates, e.attempts, e.final_nu, e.final_rel_error
        );
        let betas: Vec<String> = e.betas.iter().map(|b| format!("{b:.4}")).collect();
        println!("betas       [{}]", betas.join(", "));
    }
    if let Some(b) = &s.bounds {
        println!("bounds      {} violations", b.total_violations);
    }
    if let Some(a) = &s.algebra {
        println!("algebra     {} violations", a.total_violations);
    }
    if let Some(v) = s.verify_passed {
        println!("verify      {}", if v { "all suites passed" } else { "FAILED" });
    }
    println!("wall time   {:.2} s", s.wall_time_s);
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            let s = run_experiment(&cfg)?;
            report(&s);
            Ok(if s.verify_passed == Some(false) { EXIT_INVARIANT } else { 0 })
        }
        Command::Verify { config } => {
            let mut cfg = load(&config)?;
            cfg.run.mode = RunMode::Verify;
            let s = run_experiment(&cfg)?;
            report(&s);
            Ok(if s.verify_passed == Some(true) { 0 } else { EXIT_INVARIANT })
        }
        Command::Stats { config } => {
            let cfg = load(&config)?;
            let stats = compute_stats(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
