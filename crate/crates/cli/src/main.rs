//! `quasiheat` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quasiheat::analysis::render;
use quasiheat::config::Config;
use quasiheat::exec::Exec;
use quasiheat::fluctuations::{mh_distribution, MhFn};
use quasiheat::suite::{mh_sign_flip_mutant, run_property_suite, DEFAULT_SEED};
use quasiheat::sweep::{run_point, run_sweep, SweepSpec};
use quasiheat::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_PROPERTY: u8 = 3;

/// Heat-exchange quasiprobabilities: sweeps, single points and self-checks.
#[derive(Parser)]
#[command(name = "quasiheat", version)]
struct Cli {
    /// Evaluate on one thread even when built with parallel support.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a one- or two-axis grid and write CSV.
    Sweep {
        config: PathBuf,
        /// Output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a config key, e.g. `--set state.eta=-0.19`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Full report for a single parameter point.
    Point {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the property suite on random instances.
    Check {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, hide = true)]
        mutant: Option<Mutant>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mutant {
    SignFlip,
}

fn load(path: &Path, overrides: &[String]) -> Result<Config, Error> {
    let mut cfg = Config::from_file(path)?;
    for o in overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fail(code: u8, e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(v) = std::env::var("QUASIHEAT_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                Exec::set_threads(n);
            }
            _ => return fail(EXIT_USAGE, format!("QUASIHEAT_THREADS must be a positive integer, got '{v}'")),
        }
    }
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };

    match cli.command {
        Command::Sweep { config, out, overrides } => {
            let spec = match load(&config, &overrides).and_then(|c| SweepSpec::from_config(&c)) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            let result = run_sweep(&spec, exec);
            if let Err(e) = emit(&result.to_csv(), out.as_ref()) {
                return fail(EXIT_USAGE, e);
            }
            eprintln!("{} cells, {} infeasible", result.rows.len(), result.infeasible);
            ExitCode::SUCCESS
        }
        Command::Point { config, out, overrides } => {
            let cfg = match load(&config, &overrides) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            match run_point(&cfg, exec) {
                Ok(report) => match emit(&render(&report), out.as_ref()) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(EXIT_USAGE, e),
                },
                Err(e @ (Error::Config(_) | Error::Io(_))) => fail(EXIT_USAGE, e),
                Err(e) => fail(EXIT_INFEASIBLE, e),
            }
        }
        Command::Check { seed, trials, mutant } => {
            if trials == 0 {
                return fail(EXIT_USAGE, "--trials must be at least 1");
            }
            let mh: MhFn = match mutant {
                Some(Mutant::SignFlip) => mh_sign_flip_mutant,
                None => mh_distribution,
            };
            let report = run_property_suite(seed, trials, mh, exec);
            print!("{}", report.render());
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_PROPERTY)
            }
        }
    }
}
