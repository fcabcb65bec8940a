mod args;
mod commands;
mod report;
mod source;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(stein_clt::Error),
    Io(std::io::Error),
}

impl From<stein_clt::Error> for CliError {
    fn from(e: stein_clt::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use stein_clt::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(E::Validation { .. }) => 1,
            CliError::Core(E::Convergence { .. } | E::Domain { .. }) => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("STEIN_CLT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let args = cli.command.args().clone();
    match commands::run(&cli.command) {
        Ok(report) => {
            let text = report.render(args.format);
            let written = match &args.out {
                Some(path) => std::fs::write(path, text.as_bytes()),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("stein-clt: cannot write report: {e}");
                return ExitCode::from(2);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("stein-clt: {}: one or more checks failed", report.command);
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("stein-clt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
