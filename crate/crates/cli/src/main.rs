use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qrevival_cli::app::{self, Command, EXIT_CONFIG};
use qrevival_cli::RunConfig;

/// Thread count for the parallel parts of a run.
const THREADS_ENV: &str = "QREVIVAL_THREADS";

#[derive(Parser)]
#[command(name = "qrevival", version, about = "Wave-packet revivals in Pöschl–Teller, Rosen–Morse and square wells")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct RunArgs {
    /// INI run configuration.
    config: PathBuf,
    /// Override a config value, e.g. `--set potential.N=20`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Output directory; shorthand for `--set output.directory=DIR`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Density snapshots at the configured times.
    Evolve(RunArgs),
    /// Fidelity time series and revival peaks.
    Revivals(RunArgs),
    /// Rosen–Morse detuning table.
    Detune(RunArgs),
    /// Space-time density raster (PGM and CSV).
    Carpet(RunArgs),
    /// Grid-integrator benchmarks against the exact revival targets.
    Bench(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Evolve(a) => (Command::Evolve, a),
        Sub::Revivals(a) => (Command::Revivals, a),
        Sub::Detune(a) => (Command::Detune, a),
        Sub::Carpet(a) => (Command::Carpet, a),
        Sub::Bench(a) => (Command::Bench, a),
    };

    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n = match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                eprintln!("qrevival: {THREADS_ENV} must be a positive integer, got `{v}`");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        };
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qrevival: cannot size the thread pool: {e}");
        }
    }

    let mut overrides = args.set;
    if let Some(dir) = args.out {
        overrides.push(format!("output.directory={}", dir.display()));
    }
    let cfg = match RunConfig::from_file(&args.config, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qrevival: {e}");
            return ExitCode::from(app::exit_code(&e) as u8);
        }
    };
    ExitCode::from(app::run(command, &cfg) as u8)
}
