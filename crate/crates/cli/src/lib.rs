//! Driver for the `toric-rbim` executable: run configs, the verification
//! battery, and the subcommand implementations.

pub mod args;
pub mod config;
pub mod run;
pub mod verify;

use std::ffi::OsString;

use clap::Parser;

use args::{resolve, Cli, SEED_ENV};
use run::{execute, CliError};

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match run_cli(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli) -> Result<u8, CliError> {
    let config_text = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| CliError::Input {
            path: path.clone(),
            message: e.to_string(),
        })?),
        None => None,
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = resolve(cli, config_text.as_deref(), env_seed.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    let outcome = pool.install(|| execute(&cfg))?;
    eprint!("{}", outcome.summary);
    Ok(outcome.exit_code())
}
