use std::path::PathBuf;
use std::process::ExitCode;

use aepp_cli::args::Cli;
use aepp_cli::run::{command_name, execute, self_checks, UsageError};
use aepp_cli::{emit, output_path, OUTPUT_DIR_ENV};
use clap::{CommandFactory, Parser};

/// Exit status when a command ran but one of its checks failed.
const CHECK_FAILED: u8 = 3;
/// Same status clap uses for malformed arguments.
const USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILED),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}\n\nFor more information, try '--help'.");
            ExitCode::from(USAGE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if cli.command.is_none() && !cli.check {
        Cli::command().print_help()?;
        anyhow::bail!("no command given");
    }
    let mut ok = true;
    if cli.check {
        for c in self_checks()? {
            eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            ok &= c.passed;
        }
    }
    if let Some(command) = &cli.command {
        let result = execute(command)?;
        if !result.checks_passed {
            eprintln!("warning: {} result failed its consistency check", command_name(command));
        }
        ok &= result.checks_passed;
        let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
        let path = output_path(cli.output.as_deref(), command_name(command), cli.format, dir.as_deref());
        emit(&result.document, cli.format, path.as_deref())?;
    }
    Ok(ok)
}
