use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robust_submod_cli::{
    records::{mean_of, Algorithm},
    run_suite, run_verify, CliError, CliResult, ExperimentConfig, Suite,
};

#[derive(Parser)]
#[command(name = "robust-submod", version, about = "Robust multi-task subset selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SuiteArgs {
    /// JSON experiment configuration; suite defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; run r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent runs.
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Satellite selection: Local, Saturate and Reference.
    Satsel(SuiteArgs),
    /// Saturate with preference against plain saturation.
    Swp(SuiteArgs),
    /// Window-robust online play against per-step solving.
    Online(SuiteArgs),
    /// Image summarization over a range of cardinality bounds.
    Imgsum(SuiteArgs),
    /// Property battery; exits with 1 on any violation.
    Verify {
        /// Fewer instances per property.
        #[arg(long)]
        quick: bool,
    },
}

fn load(suite: Suite, args: &SuiteArgs) -> CliResult<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::for_suite(suite),
    };
    match config.suite {
        Some(s) if s != suite => {
            return Err(CliError::Config(format!("config is for suite {s}, not {suite}")));
        }
        _ => config.suite = Some(suite),
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    Ok(config)
}

fn run(cli: Cli) -> CliResult<()> {
    let (suite, args) = match cli.command {
        Command::Verify { quick } => {
            let report = run_verify(quick);
            let lines: String = report.checks.iter().map(|c| format!("{c}\n")).collect();
            emit(&lines);
            return if report.passed() { Ok(()) } else { Err(CliError::Violation(report.failures())) };
        }
        Command::Satsel(a) => (Suite::Satsel, a),
        Command::Swp(a) => (Suite::Swp, a),
        Command::Online(a) => (Suite::Online, a),
        Command::Imgsum(a) => (Suite::Imgsum, a),
    };
    let config = load(suite, &args)?;
    let output = run_suite(&config)?;
    let mut algorithms: Vec<Algorithm> = output.records.iter().map(|r| r.algorithm).collect();
    algorithms.sort();
    algorithms.dedup();
    let mut criteria: Vec<u8> = output.records.iter().map(|r| r.criterion).collect();
    criteria.sort();
    criteria.dedup();
    let mut text = String::new();
    let header: String = criteria.iter().map(|c| format!("{:>14}", format!("criterion {c}"))).collect();
    let _ = writeln!(text, "{:<12}{header}", "algorithm");
    for a in algorithms {
        let cells: String = criteria
            .iter()
            .map(|&c| mean_of(&output.records, a, c).map_or_else(|| format!("{:>14}", "-"), |m| format!("{m:>14.6}")))
            .collect();
        let _ = writeln!(text, "{:<12}{cells}", a.label());
    }
    for f in &output.files {
        let _ = writeln!(text, "wrote {}", f.display());
    }
    emit(&text);
    Ok(())
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
