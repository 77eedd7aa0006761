//! Command-line front end: `swwe simulate | converge | verify`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swwe_core::SwweError;

use config::{Command, CommonArgs, Settings};

#[derive(Debug, Parser)]
#[command(name = "swwe", version, about = "Linearized shallow water solver with SBP-SAT boundary treatment")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run one scenario; writes solution.csv, energy.csv and manifest.toml.
    Simulate(CommonArgs),
    /// Error and observed order over a list of resolutions; writes
    /// convergence.csv and manifest.toml.
    Converge(CommonArgs),
    /// Check the discrete invariants for a configuration; exits non-zero on
    /// any failure.
    Verify(CommonArgs),
}

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

fn exit_code(e: &SwweError) -> ExitCode {
    match e {
        SwweError::Diverged { .. } => ExitCode::from(EXIT_DIVERGED),
        _ => ExitCode::from(EXIT_USAGE),
    }
}

fn out_dir(args: &CommonArgs, cmd: Command) -> PathBuf {
    args.out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("swwe-{}", cmd.name())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Converge(a) => (Command::Converge, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };
    let result = Settings::resolve(cmd, args).and_then(|settings| match cmd {
        Command::Simulate => commands::simulate(&settings, &out_dir(args, cmd)).map(|_| true),
        Command::Converge => commands::converge(&settings, &out_dir(args, cmd)).map(|_| true),
        Command::Verify => commands::verify(&settings, args.out_dir.as_deref()),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED_CHECK),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
