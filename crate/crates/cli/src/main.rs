//! `olk`: evaluate functionals from a JSON bundle, or run seeded
//! property-check suites and emit JSON/CSV reports.
//!
//! Exit codes: 0 all good, 1 check failures or an internal solver failure,
//! 2 malformed input (bad bundle, unknown functional or suite).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use olk_cli::eval::{run_eval, EvalSelect};
use olk_cli::spec::Bundle;
use olk_cli::suites::{run_suite, RunConfig, Suite, SuiteOutcome, CSV_HEADER};
use olk_cli::CliError;

#[derive(Parser)]
#[command(name = "olk", version, about = "Orlicz-Lorentz modulars, norms, and envelope checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one functional on the pieces of a JSON bundle.
    Eval {
        /// Functional name, e.g. norm-luxemburg, envelope-P, indices.
        functional: String,
        /// Path to the JSON bundle.
        #[arg(long)]
        spec: PathBuf,
        /// Pick a bundle function by name (default: "f", "x", or first).
        #[arg(long = "fn")]
        function: Option<String>,
        /// Scalar argument override (fundamental functions, dist, conjugate).
        #[arg(long)]
        t: Option<f64>,
        /// Solver tolerance override.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a seeded check suite (or all of them) and report.
    Check {
        /// Suite name; see --help for the list.
        #[arg(long, conflicts_with = "all")]
        suite: Option<String>,
        /// Run every suite with its defaults.
        #[arg(long)]
        all: bool,
        /// Optional bundle (the exchange suite reads an explicit point).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Trial count override.
        #[arg(long)]
        trials: Option<usize>,
        /// Base seed; trial i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comparison tolerance override.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the per-trial report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Format of --out (and of stdout when --out is absent and csv is
        /// chosen).
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Drop wall time and timestamp so reports are byte-identical.
        #[arg(long)]
        no_timestamp: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    init_thread_pool();
    match run(Cli::parse()) {
        Ok(clean) => {
            if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// OLK_THREADS caps suite parallelism; unset means the rayon default.
fn init_thread_pool() {
    if let Ok(raw) = std::env::var("OLK_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn read_bundle(path: &PathBuf) -> Result<Bundle, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
    Bundle::parse(&text, &path.display().to_string())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.cmd {
        Cmd::Eval { functional, spec, function, t, tol } => {
            let bundle = read_bundle(&spec)?;
            let out = run_eval(&bundle, &functional, &EvalSelect { function, t, tol })?;
            println!("{out}");
            Ok(true)
        }
        Cmd::Check { suite, all, spec, trials, seed, tol, out, format, no_timestamp } => {
            let suites: Vec<Suite> = if all {
                Suite::ALL.to_vec()
            } else {
                let name = suite.ok_or_else(|| {
                    CliError::User("check needs --suite NAME or --all".into())
                })?;
                vec![Suite::from_name(&name).ok_or_else(|| {
                    CliError::User(format!(
                        "unknown suite \"{name}\"; expected one of: {}",
                        Suite::ALL.map(Suite::name).join(", ")
                    ))
                })?]
            };
            let bundle = spec.as_ref().map(read_bundle).transpose()?;
            let cfg = RunConfig { trials, seed, tol, bundle };

            let mut outcomes: Vec<SuiteOutcome> = Vec::new();
            for s in suites {
                outcomes.push(run_suite(s, &cfg)?);
            }

            let csv = |outcomes: &[SuiteOutcome]| {
                let mut text = String::from(CSV_HEADER);
                for o in outcomes {
                    o.write_csv(&mut text);
                }
                text
            };
            match (&out, format) {
                (Some(path), Format::Csv) => {
                    std::fs::write(path, csv(&outcomes))
                        .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
                }
                (Some(path), Format::Json) => {
                    let reports: Vec<_> =
                        outcomes.iter().map(|o| o.summary_json(no_timestamp)).collect();
                    let text = serde_json::to_string_pretty(&reports).expect("serializable") + "\n";
                    std::fs::write(path, text)
                        .map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
                }
                (None, Format::Csv) => print!("{}", csv(&outcomes)),
                (None, Format::Json) => {}
            }
            if out.is_some() || format == Format::Json {
                for o in &outcomes {
                    println!("{}", o.summary_json(no_timestamp));
                }
            }
            Ok(outcomes.iter().all(SuiteOutcome::passed))
        }
    }
}
