use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use kinetics_harness::config::parse_config;
use kinetics_harness::report::report;
use kinetics_harness::{run_experiment, HarnessError, Kind, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "kinetics", version, about = "Verification experiments for the inelastic Boltzmann equation with hard potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration
    #[arg(long)]
    seed: Option<u64>,
    /// Root directory for run directories
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Worker threads; overrides the configuration
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel tables and the per-collision physics audit
    Kernels(RunArgs),
    /// Povzner route, decomposition and bound sweep
    Povzner(RunArgs),
    /// One particle simulation
    Simulate(RunArgs),
    /// Ensemble-size ladder from a heavy-tailed initial law
    MomentCreation(RunArgs),
    /// Transform decay, Bobylev residual and time modulus
    Fourier(RunArgs),
    /// Summarize a finished run directory
    Report {
        /// Run directory containing manifest.json
        dir: PathBuf,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn execute(kind: Kind, args: RunArgs) -> Result<i32, HarnessError> {
    let mut spec = parse_config(&args.config, kind)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(HarnessError::Usage("--workers must be at least 1".into()));
        }
        spec.workers = Some(w);
    }
    let rec = run_experiment(&spec, &args.out)?;
    for c in &rec.outcome.checks {
        println!("{}", c.line());
    }
    println!("output: {}", rec.dir.display());
    let failed: Vec<_> = rec.outcome.checks.iter().filter(|c| !c.passed).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        for c in failed {
            eprintln!("invariant failed: {} (criterion {})", c.name, c.criterion);
        }
        Ok(EXIT_CHECK_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => code(EXIT_OK),
                _ => code(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Kernels(a) => execute(Kind::KernelReport, a),
        Command::Povzner(a) => execute(Kind::PovznerSweep, a),
        Command::Simulate(a) => execute(Kind::Simulate, a),
        Command::MomentCreation(a) => execute(Kind::MomentCreation, a),
        Command::Fourier(a) => execute(Kind::FourierResidual, a),
        Command::Report { dir } => report(&dir).map(|r| {
            print!("{}", r.text);
            if r.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }),
    };
    match result {
        Ok(c) => code(c),
        Err(e) => {
            eprintln!("error: {e}");
            code(EXIT_USAGE)
        }
    }
}
