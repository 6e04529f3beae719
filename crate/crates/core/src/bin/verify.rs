//! Batch verification runner. Executes a named check suite and writes a
//! machine-readable report; the process exits 0 exactly when no check
//! FAILed. Reports are deterministic for a fixed seed: timings are off
//! unless SPECREC_TIMING=1 and the timestamp honors SOURCE_DATE_EPOCH.

use clap::{Parser, ValueEnum};
use specrec::suites::{run_suite, Suite, SuiteConfig, SEED_DEFAULT, TRUNC_DEFAULT};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Runs a named verification suite against configured precision and
/// truncation budgets.
#[derive(Parser, Debug)]
#[command(name = "verify", version)]
struct Cli {
    /// Suite to run: arith, special, transforms, series, local,
    /// spectral, or all.
    suite: String,

    /// Override every check's pass tolerance (0 forces failures).
    #[arg(long = "tol")]
    tol: Option<f64>,

    /// Term budget a single check may spend; checks needing more SKIP.
    #[arg(long = "trunc", default_value_t = TRUNC_DEFAULT)]
    trunc: u64,

    /// Seed for every randomized draw.
    #[arg(long = "seed", default_value_t = SEED_DEFAULT)]
    seed: u64,

    /// Write the report to this path instead of stdout.
    #[arg(long = "out")]
    out: Option<PathBuf>,

    /// Report serialization format.
    #[arg(long = "format", value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(suite) = Suite::parse(&cli.suite) else {
        eprintln!(
            "verify: unknown suite '{}'; expected one of arith, special, transforms, series, local, spectral, all",
            cli.suite
        );
        return ExitCode::from(2);
    };
    let config = SuiteConfig {
        suite,
        tol_override: cli.tol,
        trunc_cap: cli.trunc,
        seed: cli.seed,
    };
    let report = match run_suite(&config) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("verify: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    let serialized = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, serialized) {
            eprintln!("verify: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else if let Err(e) = std::io::stdout().write_all(serialized.as_bytes()) {
        eprintln!("verify: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
