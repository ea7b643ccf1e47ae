//! `ffgas`: level tables, equation-of-state sweeps and the acceptance checks.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 configuration
//! error, 3 numerical failure (including any non-finite output value).

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ffgas_core::verify::CriterionReport;
use serde::Serialize;

use config::{Format, RunConfig};
use table::Table;

#[derive(Parser)]
#[command(name = "ffgas", version, about = "Fast-forward expansion of an ideal 1D Fermi gas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-level E_n, F_n and E_ff over the time sweep.
    Levels(Common),
    /// Ensemble means and equation-of-state residuals over the time sweep.
    Eos(Common),
    /// Run the acceptance checks; exits 1 if any fails.
    Verify(Common),
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration; all sections optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: `output.path`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (default: `output.format`, else csv).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl From<ffgas_core::Error> for Failure {
    fn from(e: ffgas_core::Error) -> Self {
        use ffgas_core::Error as E;
        match e {
            E::Domain(_) | E::UnsupportedModel { .. } => Failure::Config(e.to_string()),
            E::Truncation { .. } | E::Numeric { .. } => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    passed: bool,
    criteria: Vec<CriterionEntry<'a>>,
}

#[derive(Serialize)]
struct CriterionEntry<'a> {
    passed: bool,
    #[serde(flatten)]
    report: &'a CriterionReport,
}

fn resolve(args: &Common) -> Result<(RunConfig, Format, Option<PathBuf>), Failure> {
    let config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let format = match args.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => config.output.format.unwrap_or(Format::Csv),
    };
    let out = args.out.clone().or_else(|| config.output.path.clone());
    Ok((config, format, out))
}

fn finite(table: &Table) -> Result<(), Failure> {
    match table.first_non_finite() {
        Some((row, column)) => Err(Failure::Numeric(format!(
            "non-finite value in row {row}, column {column}"
        ))),
        None => Ok(()),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table.to_json_rows()).expect("tables serialize");
            s.push('\n');
            s
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Levels(args) => {
            let (config, format, out) = resolve(&args)?;
            let table = commands::levels(&config)?;
            finite(&table)?;
            emit(&render(&table, format), out.as_ref())
        }
        Command::Eos(args) => {
            let (config, format, out) = resolve(&args)?;
            let (table, warnings) = commands::eos(&config)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            finite(&table)?;
            emit(&render(&table, format), out.as_ref())
        }
        Command::Verify(args) => {
            let (config, format, out) = resolve(&args)?;
            let reports = commands::verify(&config)?;
            for r in &reports {
                eprintln!(
                    "criterion {} {}: {}",
                    r.id,
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.title
                );
            }
            let table = commands::check_table(&reports);
            finite(&table)?;
            let passed = reports.iter().all(CriterionReport::passed);
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Json => {
                    let report = VerifyReport {
                        passed,
                        criteria: reports
                            .iter()
                            .map(|r| CriterionEntry {
                                passed: r.passed(),
                                report: r,
                            })
                            .collect(),
                    };
                    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
                    s.push('\n');
                    s
                }
            };
            emit(&text, out.as_ref())?;
            if passed {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Config(msg) => eprintln!("error: {msg}"),
                Failure::Numeric(msg) => eprintln!("numeric failure: {msg}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(failure.code())
        }
    }
}
