mod args;
mod commands;
mod discrepancy;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use output::{render, resolve_out, CliError, Document, RunConfig};

fn dispatch(command: &Command) -> Result<Document, CliError> {
    match command {
        Command::Iterate(a) => commands::iterate_cmd(a),
        Command::FixedPoints(a) => commands::fixed_points_cmd(a),
        Command::Lyapunov(a) => commands::lyapunov_cmd(a),
        Command::Bifurcate(a) => commands::bifurcate_cmd(a),
        Command::StorageReport(a) => commands::storage_cmd(a),
        Command::Placement(a) => commands::placement_cmd(a),
        Command::LossExact(a) => commands::loss_exact_cmd(a),
        Command::LossCurve(a) => commands::loss_curve_cmd(a),
        Command::LossMc(a) => commands::loss_mc_cmd(a),
        Command::VerifyCoefficients(_) => commands::verify_cmd(),
        Command::DiscrepancyReport(a) => discrepancy::discrepancy_cmd(a),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let format = cli.format.unwrap_or_else(|| cli.command.default_format());
    let doc = dispatch(&cli.command)?;
    let config = RunConfig {
        command: name,
        args: &cli.command,
        format,
        out: cli.out.as_deref(),
    };
    let text = render(&doc, &config)?;

    match resolve_out(cli.out.as_deref(), name, format) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(&path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cloudmap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

