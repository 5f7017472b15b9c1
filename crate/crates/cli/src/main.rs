use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use potwalk_cli::{exit, parse_config, run, CliError, RunOptions, Subcommand};
use potwalk_core::Exec;

/// Random walks in random potentials: brackets, norms, rate functions and
/// path measures.
#[derive(Debug, Parser)]
#[command(name = "potwalk", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for random fields; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

#[cfg(feature = "parallel")]
fn start_pool(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn start_pool(_: usize) -> Result<(), String> {
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return code(if e.use_stderr() { exit::VALIDATION } else { exit::OK });
        }
    };
    let exec = match args.threads {
        Some(0) => {
            eprintln!("--threads must be at least 1");
            return code(exit::VALIDATION);
        }
        Some(1) => Exec::Sequential,
        Some(n) => {
            if let Err(e) = start_pool(n) {
                eprintln!("cannot start {n} worker threads: {e}");
                return code(exit::VALIDATION);
            }
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return code(exit::VALIDATION);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            eprint!("{}", CliError::Config(errs));
            return code(exit::VALIDATION);
        }
    };
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let start = Instant::now();
    match run(args.subcommand, &cfg, &RunOptions { out: args.out, exec }) {
        Ok(s) => {
            for l in &s.lines {
                println!("{l}");
            }
            for (at, e) in &s.row_errors {
                eprintln!("{at}: {e}");
            }
            for f in &s.failed_checks {
                eprintln!("failed: {f}");
            }
            eprintln!("{}: {} files in {:.2}s", args.subcommand.name(), s.files.len(), start.elapsed().as_secs_f64());
            code(s.exit_code)
        }
        Err(e) => {
            eprintln!("{}", e.to_string().trim_end());
            code(e.exit_code())
        }
    }
}
