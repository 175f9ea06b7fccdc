use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use holosem_cli::runner::run_spec;
use holosem_cli::spec::{ExperimentSpec, TASK_NAMES};

/// Deterministic experiment runner: builds a finite reversible chain,
/// dispatches the requested tasks, and writes machine-readable reports.
///
/// Exit codes: 0 all hard checks pass, 1 a check failed, 2 spec error,
/// 3 numeric non-convergence.
#[derive(Debug, Parser)]
#[command(name = "holosem", version, about)]
struct Cli {
    /// Experiment spec (TOML)
    #[arg(long, value_name = "PATH", required_unless_present = "list_tasks")]
    spec: Option<PathBuf>,

    /// Output directory for report.csv and report.json
    #[arg(long, value_name = "DIR", default_value = "reports")]
    out: PathBuf,

    /// Master seed override (defaults to the spec's seed)
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Stop at the first failing task
    #[arg(long)]
    fail_fast: bool,

    /// Replace every hard-check tolerance with this value
    #[arg(long, value_name = "X")]
    tol: Option<f64>,

    /// Parallelize independent tasks across N threads (reports stay in
    /// declaration order)
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,

    /// List the available task kinds and exit
    #[arg(long)]
    list_tasks: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.list_tasks {
        for name in TASK_NAMES {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }

    let spec_path = cli.spec.expect("clap enforces --spec");
    let text = match std::fs::read_to_string(&spec_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", spec_path.display());
            return ExitCode::from(2);
        }
    };
    let spec = match ExperimentSpec::parse(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid spec {}: {e}", spec_path.display());
            return ExitCode::from(2);
        }
    };

    let outcome = match run_spec(&spec, cli.seed, cli.tol, cli.fail_fast, cli.jobs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    let csv_path = cli.out.join("report.csv");
    let json_path = cli.out.join("report.json");
    if let Err(e) = std::fs::write(&csv_path, outcome.report.to_csv())
        .and_then(|_| std::fs::write(&json_path, outcome.report.to_json()))
    {
        eprintln!("error: cannot write reports: {e}");
        return ExitCode::from(2);
    }

    let checks: usize = outcome.report.rows.iter().filter(|r| r.check.is_some()).count();
    println!(
        "{} rows, {} checks, {} check failures, {} numeric failures ({} and {} written)",
        outcome.report.rows.len(),
        checks,
        outcome.check_failures,
        outcome.numeric_failures,
        csv_path.display(),
        json_path.display(),
    );
    for row in outcome.report.rows.iter().filter(|r| r.check == Some(false)) {
        eprintln!("check failed: {} / {} = {:e}", row.task, row.name, row.value);
    }

    if outcome.config_failures > 0 {
        ExitCode::from(2)
    } else if outcome.numeric_failures > 0 {
        ExitCode::from(3)
    } else if outcome.check_failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
