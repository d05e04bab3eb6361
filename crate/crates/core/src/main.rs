use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use rlab::harness::{self, Scenario, ScenarioConfig};
use rlab::report::Report;

/// Run a verification scenario from a TOML config.
///
/// Exit status: 0 when every check passes, 2 when a check fails, 1 on a
/// configuration or runtime error.
#[derive(Parser, Debug)]
#[command(name = "rlab", version)]
struct Cli {
    /// orbit, recur, ctype-verify, subspace-build, subspace-verify,
    /// spectra-grid, claim-run, or `validate` to only check the config
    scenario: String,
    /// Scenario config (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: rlab-out/<scenario>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_ERROR: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_ERROR),
            };
        }
    };
    if cli.scenario == "validate" {
        return validate(&cli);
    }
    let scenario: Scenario = match cli.scenario.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("rlab-out").join(scenario.as_str()));
    match harness::run_file(&cli.config, scenario, &out, cli.seed) {
        Ok(report) => {
            print_report(&report);
            println!("report: {}", out.join(harness::REPORT_FILE).display());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn validate(cli: &Cli) -> ExitCode {
    let config = match ScenarioConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let violations = harness::validate(&config);
    if violations.is_empty() {
        println!("{}: ok", cli.config.display());
        return ExitCode::SUCCESS;
    }
    for v in &violations {
        println!("{}: {v}", cli.config.display());
    }
    ExitCode::from(EXIT_ERROR)
}

fn print_report(report: &Report) {
    for c in &report.checks {
        println!(
            "{} {:<36} measured {:<12e} {} {:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.relation.symbol(),
            c.bound
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("{}: {}", report.scenario, if report.pass { "pass" } else { "FAIL" });
}
