//! Command-line runner for the ground-state and blow-up experiments.
//!
//! Exit codes: 0 on success, 2 when the config or parameters are invalid,
//! 3 when a numerical stage fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hardy_nls::experiment::{parse_config_with_overrides, to_json};
use hardy_nls::{run_experiment, Config, Error, ExperimentKind, Params};

#[derive(Parser)]
#[command(name = "hardy-nls", version, about = "Ground states and blow-up for NLS with an inverse-square potential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state and check its Pohozaev identities.
    Groundstate(RunArgs),
    /// Tabulate S, Q and K along the dilation curve of the ground state.
    Scaling(RunArgs),
    /// Evolve the dilated ground state.
    Evolve(RunArgs),
    /// Evolve the dilated ground state and certify blow-up.
    Instability(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults to d=3, c=0.1, alpha=2, omega=1.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `KEY=VALUE` with a dotted key, e.g. `params.c=0.2`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

const VALIDATION: u8 = 2;
const NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        VALIDATION
    } else {
        NUMERICAL
    }
}

fn load(args: &RunArgs) -> Result<Config, Error> {
    let text = match &args.config {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?
        }
        None => Config::new(Params::new(3, 0.1, 2.0, 1.0)?).to_toml()?,
    };
    let mut overrides = args.overrides.clone();
    if let Some(out) = &args.out {
        // quoted so the path is always read as a TOML string
        overrides.push(format!("output_dir={}", toml_string(&out.to_string_lossy())));
    }
    parse_config_with_overrides(&text, &overrides)
}

fn toml_string(s: &str) -> String {
    let escaped: String = s
        .chars()
        .flat_map(|c| match c {
            '"' => vec!['\\', '"'],
            '\\' => vec!['\\', '\\'],
            c => vec![c],
        })
        .collect();
    format!("\"{escaped}\"")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Groundstate(a) => (ExperimentKind::Groundstate, a),
        Command::Scaling(a) => (ExperimentKind::Scaling, a),
        Command::Evolve(a) => (ExperimentKind::Evolve, a),
        Command::Instability(a) => (ExperimentKind::Instability, a),
    };
    let config = match load(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    match run_experiment(&config, kind) {
        Ok(result) => {
            match to_json(&result.summary) {
                Ok(s) => print!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(NUMERICAL);
                }
            }
            for a in &result.artifacts {
                eprintln!("wrote {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            for a in &f.artifacts {
                eprintln!("partial output {}", a.display());
            }
            ExitCode::from(exit_code(&f.error))
        }
    }
}
