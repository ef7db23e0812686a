use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use psd_approx::scenario::{Format, Scenario, TABLE2, TABLE3};
use psd_approx::table::{emit, run_scenario, write_output, RunOptions};
use psd_approx::{eps_from_env, Error};

/// Poisson and negative binomial approximation bounds for sums of power
/// series distributed variables.
#[derive(Parser)]
#[command(name = "psd-approx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output format; defaults to the scenario's own setting.
    #[arg(long, value_parser = ["csv", "markdown"])]
    format: Option<String>,
    /// Check every certified bound against the exact convolution.
    #[arg(long)]
    certify: bool,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Geometric comparison table (bundled scenario).
    Table2 {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Logarithmic comparison table (bundled scenario).
    Table3 {
        #[command(flatten)]
        output: OutputArgs,
    },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

fn execute(scenario: Result<Scenario, Error>, args: OutputArgs) -> Result<u8, (u8, Error)> {
    let scenario = scenario.map_err(|e| match e {
        Error::Io(_) => (EXIT_FAILURE, e),
        _ => (EXIT_PARSE, e),
    })?;
    let eps = eps_from_env().map_err(|e| (EXIT_FAILURE, e))?;
    let opts = RunOptions {
        eps,
        certify: args.certify,
        ..RunOptions::default()
    };
    let table = run_scenario(&scenario, &opts).map_err(|e| (EXIT_FAILURE, e))?;
    let format = match args.format.as_deref() {
        Some(f) => f.parse::<Format>().expect("restricted by clap"),
        None => scenario.format,
    };
    let text = emit(&table, format);
    let out = args
        .out
        .map(|p| p.display().to_string())
        .or(scenario.output.clone());
    match out {
        Some(path) => write_output(&path, &text).map_err(|e| (EXIT_FAILURE, e))?,
        None => print!("{text}"),
    }
    if table.violations() > 0 {
        eprintln!(
            "{} certified bound(s) fell below the exact distance",
            table.violations()
        );
        return Ok(EXIT_VIOLATION);
    }
    if table.all_infeasible() {
        eprintln!("every requested method was infeasible");
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, output } => execute(Scenario::from_path(&scenario), output),
        Command::Table2 { output } => execute(Scenario::parse(TABLE2), output),
        Command::Table3 { output } => execute(Scenario::parse(TABLE3), output),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
