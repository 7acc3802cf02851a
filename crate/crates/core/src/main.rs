use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use twotime::cli::{self, ExitStatus, RunConfig, RunOptions};

/// Scenario runner for the Dirac time-operator laboratory.
#[derive(Debug, Parser)]
#[command(name = "twotime", version)]
struct Args {
    /// Run configuration (TOML). Defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario to run; overrides the configuration.
    #[arg(long)]
    scenario: Option<String>,
    /// Output root; falls back to the config, then $TWOTIME_OUTPUT.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed for randomized probes; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the scenario catalog and exit.
    #[arg(long)]
    list: bool,
    /// Also write dense operator matrices as raw little-endian binaries.
    #[arg(long)]
    binary_dumps: bool,
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return exit(ExitStatus::ParseError);
        }
        Err(e) => {
            print!("{e}");
            return exit(ExitStatus::Success);
        }
    };
    if args.list {
        print!("{}", cli::catalog_text());
        return exit(ExitStatus::Success);
    }

    let mut config = match &args.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return exit(ExitStatus::ParseError);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(s) = args.scenario {
        config.scenario = s;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return exit(ExitStatus::ParseError);
    }
    if args.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return exit(ExitStatus::ParseError);
    }

    let options = RunOptions {
        output: cli::resolve_output(args.output, &config),
        threads: args.threads,
        binary_dumps: args.binary_dumps,
    };
    let summary = match cli::run(&config, &options) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(ExitStatus::ScenarioFailure);
        }
    };
    for r in &summary.manifest.scenarios {
        let verdict = match r.status {
            ExitStatus::Success => "PASS",
            ExitStatus::VerificationFailure => "FAIL",
            _ => "ERROR",
        };
        println!("{verdict} {} ({:.2} s)", r.name, r.wall_time_s);
        if let Some(e) = &r.error {
            println!("    {e}");
        }
        for f in &r.failures {
            println!("    failed: {f}");
        }
    }
    println!("artifacts in {}", summary.output.display());
    exit(summary.status)
}
