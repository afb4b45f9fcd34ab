//! `kernelreg` — configuration-driven experiment runner.
//!
//! Subcommands mirror the config modes: `solve`, `verify`, `probe`, `gram`,
//! plus `validate` for schema checking alone. Exit codes: 0 success / all
//! checks pass, 1 check failure, 2 config error, 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use kernelreg::config::{validate_config, ExperimentConfig, Mode};
use kernelreg::runner::run;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kernelreg", version, about = "Kernel regularization toolkit runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON report here (overrides [output].json).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the per-trial CSV here (overrides [output].csv).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce and solve a regularization problem.
    Solve(CommonArgs),
    /// Run the full consistency suite for a regularizer.
    Verify(CommonArgs),
    /// Run one named probe.
    Probe(CommonArgs),
    /// Dump the Gram matrix of the configured functionals.
    Gram(CommonArgs),
    /// Validate a config file and report every problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;
const EXIT_NUMERICAL_FAILURE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load_config(&config) {
            Ok(_) => {
                println!("ok: config is valid");
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Solve(args) => execute(Mode::Solve, args),
        Command::Verify(args) => execute(Mode::Verify, args),
        Command::Probe(args) => execute(Mode::Probe, args),
        Command::Gram(args) => execute(Mode::Gram, args),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(ExitCode::from(EXIT_CONFIG_ERROR));
        }
    };
    match validate_config(&text) {
        Ok(config) => Ok(config),
        Err(issues) => {
            eprintln!("error: invalid config {}:", path.display());
            for issue in issues {
                eprintln!("  {issue}");
            }
            Err(ExitCode::from(EXIT_CONFIG_ERROR))
        }
    }
}

fn execute(mode: Mode, args: CommonArgs) -> ExitCode {
    let mut config = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if config.mode != mode {
        eprintln!(
            "error: config declares mode = \"{}\" but the {} subcommand was invoked",
            config.mode.as_str(),
            mode.as_str()
        );
        return ExitCode::from(EXIT_CONFIG_ERROR);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let json_path = args
        .out
        .or_else(|| config.output.json.as_ref().map(PathBuf::from));
    let csv_path = args
        .csv
        .or_else(|| config.output.csv.as_ref().map(PathBuf::from));

    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            // A failed run still leaves a structured record behind.
            if let Some(path) = &json_path {
                let report = serde_json::json!({
                    "tool": { "name": "kernelreg", "version": env!("CARGO_PKG_VERSION") },
                    "mode": config.mode.as_str(),
                    "seed": config.seed,
                    "config": config,
                    "error": e.to_string(),
                });
                let _ = std::fs::write(path, serde_json::to_string_pretty(&report).unwrap());
            }
            return ExitCode::from(EXIT_NUMERICAL_FAILURE);
        }
    };

    for check in &outcome.report.checks {
        println!(
            "{} {}: {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }

    let json = outcome.report.to_json();
    match json_path {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &json) {
                eprintln!("error: cannot write report {}: {e}", path.display());
                return ExitCode::from(EXIT_NUMERICAL_FAILURE);
            }
            println!("report: {}", path.display());
        }
        None => println!("{json}"),
    }

    if let Some(csv) = &outcome.csv {
        if let Some(path) = csv_path {
            if let Err(e) = std::fs::write(&path, csv.render()) {
                eprintln!("error: cannot write csv {}: {e}", path.display());
                return ExitCode::from(EXIT_NUMERICAL_FAILURE);
            }
            println!("csv: {}", path.display());
        }
    }

    if outcome.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILURE)
    }
}
