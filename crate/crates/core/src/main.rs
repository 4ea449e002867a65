use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use liftkit::cli::{self, Command, RunConfig};

/// Relaxed commutant lifting toolkit.
#[derive(Parser, Debug)]
#[command(name = "liftkit", version, about)]
struct Args {
    #[arg(long, value_enum)]
    cmd: Command,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation degree N.
    #[arg(long, default_value_t = 24)]
    degree: usize,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long = "out")]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol_verify: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_contract: f64,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { cli::EXIT_USAGE } else { cli::EXIT_PASS };
            return ExitCode::from(code as u8);
        }
    };
    let grid_radii = match std::env::var(cli::GRID_ENV) {
        Ok(s) => match cli::parse_grid(&s) {
            Ok(r) => Some(r),
            Err(msg) => {
                eprintln!("{}: {msg}", cli::GRID_ENV);
                return ExitCode::from(cli::EXIT_USAGE as u8);
            }
        },
        Err(_) => None,
    };
    let cfg = RunConfig {
        seed: args.seed,
        degree: args.degree,
        tol_verify: args.tol_verify,
        tol_contract: args.tol_contract,
        input: args.input,
        output: args.output,
        grid_radii,
        ..RunConfig::new(args.cmd)
    };
    let outcome = cli::run(&cfg);
    println!("{}", outcome.report.to_json());
    ExitCode::from(outcome.exit_code as u8)
}
