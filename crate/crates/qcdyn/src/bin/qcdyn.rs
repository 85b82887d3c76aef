//! Command-line front end: run configurations, run preset scenarios,
//! or check a configuration against the well-posedness gate.
//!
//! Exit codes are stable: 0 success, 2 configuration error, 3 gate
//! refusal, 4 numerical failure during stepping, 1 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcdyn::dynamics::check_theorem_hypotheses;
use qcdyn::material::derive_coefficients;
use qcdyn::{config, scenario, Error};

#[derive(Parser)]
#[command(
    name = "qcdyn",
    about = "Deterministic simulator for coupled displacement/phason dynamics \
             on rectangular grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file and write its output bundle.
    Simulate {
        /// Path to a `section.key = value` configuration file.
        config: PathBuf,
        /// Run even when the well-posedness gate fails.
        #[arg(long)]
        override_gate: bool,
    },
    /// Run a named preset scenario.
    Scenario {
        /// One of the preset names (see `--help` for the list).
        #[arg(help = preset_help())]
        name: String,
        /// Output directory (default: <output root>/<preset dir>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-dial the amplitude of the preset's initial velocity profile.
        #[arg(long)]
        dot_u0_amp: Option<f64>,
        /// Run even when the well-posedness gate fails.
        #[arg(long)]
        override_gate: bool,
    },
    /// Evaluate the well-posedness gate for a configuration without
    /// running it (exit 0 = pass, 3 = fail).
    Validate {
        /// Path to a configuration file.
        config: PathBuf,
    },
}

fn preset_help() -> String {
    format!("One of: {}", scenario::names().join(", "))
}

fn read_config(path: &Path) -> Result<config::RunConfig, Error> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    config::parse_config(&text)
}

fn print_coefficients(p: &qcdyn::material::MaterialParams) {
    let c = derive_coefficients(p);
    println!(
        "derived coefficients: xi = {}, xibar = {}, zeta = {}, gamma = {}, kappa = {}, kappa0 = {}",
        c.xi, c.xibar, c.zeta, c.gamma, c.kappa, c.kappa0
    );
}

fn print_summary(s: &scenario::ExecSummary) {
    if let Some(gate) = &s.gate {
        println!("{gate}");
    }
    for w in &s.warnings {
        println!("warning: {w}");
    }
    for line in &s.lines {
        println!("{line}");
    }
    println!("output written to {}", s.dir.display());
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate { config: path, override_gate } => {
            let mut cfg = read_config(&path)?;
            if override_gate {
                cfg.solver.override_gate = true;
            }
            print_coefficients(&cfg.material);
            let dir = scenario::resolve_out_dir(&cfg.output.dir);
            let summary = scenario::execute(&cfg, &dir)?;
            print_summary(&summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Scenario { name, out, dot_u0_amp, override_gate } => {
            let summary =
                scenario::run_scenario(&name, out.as_deref(), dot_u0_amp, override_gate)?;
            print_summary(&summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config: path } => {
            let cfg = read_config(&path)?;
            cfg.material.validate()?;
            cfg.solver.validate()?;
            print_coefficients(&cfg.material);
            let grid = cfg.build_grid()?;
            let state0 = cfg.build_initial_state(&grid)?;
            let gate = check_theorem_hypotheses(&cfg.material, &state0, cfg.model);
            println!("{}", gate.summary());
            Ok(if gate.pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::UnknownScenario(_)) {
                eprintln!("available scenarios: {}", scenario::names().join(", "));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
