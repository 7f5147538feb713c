//! `jcsc-sim`: experiment runner for the joint communication-and-sensing
//! simulation suite.
//!
//! Exit codes: 0 ok, 1 usage or parse error, 2 invariant violation or I/O
//! failure, 3 run completed but raised a flag (suppress with --allow-flags).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jcsc_sim::csv_io::parse_csv;
use jcsc_sim::runner::{run_scenario, Overrides};
use jcsc_sim::scenario::{load_scenario, ScenarioError, BUNDLED};
use jcsc_sim::summary::{compare_curves, gain_at_level, report, select_curve};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INVARIANT: u8 = 2;
const EXIT_FLAGGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "jcsc-sim",
    about = "Joint communication-and-sensing network simulation experiments",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (bundled name or TOML file) and write its CSV.
    Run(RunArgs),
    /// Compare two result curves and report relative improvement.
    Compare(CompareArgs),
    /// List the bundled scenarios.
    ListScenarios,
}

#[derive(Args)]
struct RunArgs {
    /// Bundled scenario name or path to a scenario file.
    scenario: String,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the per-point trial count (exact; disables min-bits sizing).
    #[arg(long)]
    trials: Option<u64>,
    /// Output CSV path (defaults to the scenario's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 0 even when the run raises truncated/saturated/warn flags.
    #[arg(long)]
    allow_flags: bool,
}

#[derive(Args)]
struct CompareArgs {
    csv_a: PathBuf,
    csv_b: PathBuf,
    /// Variant to select from the first file (e.g. plain_ofdm, cra).
    #[arg(long)]
    variant_a: Option<String>,
    /// Variant to select from the second file.
    #[arg(long)]
    variant_b: Option<String>,
    /// Metric to select when files carry several (e.g. range_rmse_m).
    #[arg(long)]
    metric: Option<String>,
    /// Also report the horizontal axis gain where both curves cross this
    /// metric level (log-linear interpolation), e.g. 1e-3 for BER curves.
    #[arg(long)]
    at_level: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with status 0.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::ListScenarios => {
            for (name, _, blurb) in BUNDLED {
                println!("{name:12} {blurb}");
            }
            EXIT_OK
        }
    };
    ExitCode::from(code)
}

fn cmd_run(args: RunArgs) -> u8 {
    let (scenario, name) = match load_scenario(&args.scenario) {
        Ok(loaded) => loaded,
        Err(e @ ScenarioError::Parse(_)) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
        Err(e @ ScenarioError::Invariant(_)) => {
            eprintln!("{e}");
            return EXIT_INVARIANT;
        }
    };
    let overrides = Overrides { seed: args.seed, trials: args.trials, out: args.out };
    match run_scenario(scenario, &name, &overrides) {
        Ok(outcome) => {
            let flag = outcome.worst_flag;
            println!(
                "wrote {} ({} rows, flag: {})",
                outcome.path.display(),
                outcome.series.points.len(),
                flag.as_str()
            );
            if flag != jcsc_core::series::PointFlag::Ok && !args.allow_flags {
                eprintln!("run raised flag '{}'; pass --allow-flags to accept", flag.as_str());
                EXIT_FLAGGED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("run failed: {e:#}");
            EXIT_INVARIANT
        }
    }
}

fn cmd_compare(args: CompareArgs) -> u8 {
    let read = |path: &PathBuf| {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
    };
    let (content_a, content_b) = match (read(&args.csv_a), read(&args.csv_b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let run = || -> anyhow::Result<String> {
        let rows_a = parse_csv(&content_a)?;
        let rows_b = parse_csv(&content_b)?;
        let a = select_curve(&rows_a, args.variant_a.as_deref(), args.metric.as_deref())?;
        let b = select_curve(&rows_b, args.variant_b.as_deref(), args.metric.as_deref())?;
        let points = compare_curves(&a, &b)?;
        let gain = args.at_level.and_then(|level| Some((level, gain_at_level(&a, &b, level)?)));
        Ok(report(&a, &b, &points, gain))
    };
    match run() {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("compare failed: {e:#}");
            EXIT_INVARIANT
        }
    }
}
