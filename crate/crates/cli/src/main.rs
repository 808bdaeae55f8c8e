use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use vsoliton_cli::{execute, load, Command, Overrides, Suite};

#[derive(Parser)]
#[command(
    name = "vsoliton",
    version,
    about = "Spectral V-soliton solver and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve at the configured eps; exit 0 iff Newton converged.
    Solve(Args),
    /// Run the configured eps schedule with warm starts.
    Sweep(Args),
    /// Run randomized verification suites; exit 0 iff every check passes.
    Verify(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated suites, overriding `suites.run`.
    #[arg(long, value_delimiter = ',')]
    suites: Option<Vec<Suite>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };
    let overrides = Overrides {
        out: args.out,
        seed: args.seed,
        suites: args.suites,
    };
    let start = Instant::now();
    let result = load(&args.config, &overrides).and_then(|cfg| execute(command, &cfg));
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            for f in &outcome.failures {
                eprintln!("FAILED {f}");
            }
            eprintln!("finished in {:.2?}", start.elapsed());
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
