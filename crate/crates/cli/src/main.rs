use std::process::ExitCode;

use clap::Parser;

use arraybin_cli::error::CliError;
use arraybin_cli::{run, Cli};

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("ARRAYBIN_THREADS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map(Some).map_err(|_| CliError::User(format!("ARRAYBIN_THREADS must be a positive integer, got '{v}'"))),
        _ => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = thread_count(cli.threads).and_then(|threads| {
        if let Some(n) = threads {
            if n == 0 {
                return Err(CliError::User("thread count must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Internal(e.to_string()))?;
        }
        run(&cli)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
