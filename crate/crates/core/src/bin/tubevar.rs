use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tubevar::scenario::{output_root, run_file, verify_all, Check, RunRecord};

/// Scenario runner for trajectory-local variation, partial variation measures
/// and delay sensitivity.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Artifact root; overrides $TUBEVAR_OUTPUT_ROOT.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a TOML file.
    Run {
        file: PathBuf,
        /// Replace every expectation tolerance in the file.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// List the built-in multifunctions, fields, systems and controls.
    Catalog,
    /// Run the built-in invariant suite.
    VerifyAll,
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}

fn print_record(r: &RunRecord) {
    println!(
        "{} [{}] {} ({:.2} s, hash {})",
        r.name,
        r.kind,
        if r.passed { "PASS" } else { "FAIL" },
        r.wall_time_s,
        &r.scenario_hash[..12]
    );
    print_checks(&r.checks);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ok = match cli.command {
        Command::Catalog => {
            print!("{}", tubevar::catalog::catalog_table());
            true
        }
        Command::VerifyAll => {
            let checks = verify_all();
            print_checks(&checks);
            checks.iter().all(|c| c.passed)
        }
        Command::Run { file, tolerance } => match run_file(&file, &output_root(cli.out), tolerance) {
            Ok(records) => {
                records.iter().for_each(print_record);
                records.iter().all(|r| r.passed)
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
    };
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
