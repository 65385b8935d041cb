use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcatalysis::cli::{
    check_spec_file, emit_report, run_scenario, CliError, Format, ReportDocument, RunConfig,
    EXIT_DATA, EXIT_USAGE,
};

/// Decide realizability and quantum catalysis of pure-state processes.
#[derive(Parser)]
#[command(name = "qcatalysis", version)]
struct Args {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Report format: json or text.
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Seed for randomized protocol inputs and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Grid points for the deletion-family sweep.
    #[arg(long, global = true, default_value_t = 64)]
    steps: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in scenario: cloning, deletion, deletion-sweep,
    /// no-info-cloning, teleport, nonlocal-cnot.
    Run { scenario: String },
    /// Classify a process-spec JSON file.
    Check { path: PathBuf },
}

fn write_report(doc: &ReportDocument, args: &Args) -> Result<(), u8> {
    let bytes = emit_report(doc, args.format);
    let written = match &args.output {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| e.to_string()),
    };
    written.map_err(|msg| {
        eprintln!("error: {msg}");
        EXIT_DATA
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let config = RunConfig {
        tolerance: args.tolerance,
        format: args.format,
        seed: args.seed,
        steps: args.steps,
    };
    let result: Result<ReportDocument, CliError> = match &args.command {
        Command::Run { scenario } => run_scenario(scenario, &config),
        Command::Check { path } => check_spec_file(path, &config),
    };
    match result {
        Ok(doc) => {
            if let Err(code) = write_report(&doc, &args) {
                return ExitCode::from(code);
            }
            for name in doc.failed_assertions() {
                eprintln!("assertion failed: {name}");
            }
            ExitCode::from(doc.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
