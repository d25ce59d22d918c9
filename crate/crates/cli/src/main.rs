use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gradgraph_cli::{emit, run_with_threads, CliError, Format, RunConfig, Scenario};

/// Expansion fits, flux formulas and Poisson solves for gradient-graph equations.
#[derive(Debug, Parser)]
#[command(name = "gradgraph", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured scenario.
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::field("--config", format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text)?
        }
        None => {
            let scenario = args
                .scenario
                .ok_or_else(|| CliError::field("--scenario", "required without --config"))?;
            RunConfig::new(scenario, gradgraph::solutions::SolutionDescriptor::MaRadialExact { c0: 0.0, c1: 1.0 })
        }
    };
    if let Some(s) = args.scenario {
        cfg.scenario = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(d) = &args.out {
        cfg.output.dir = Some(d.clone());
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = load(&args).and_then(|cfg| {
        let report = run_with_threads(&cfg, threads)?;
        let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
        emit(&report, &dir, cfg.output.format, threads)?;
        Ok((report, dir))
    });
    match outcome {
        Ok((report, dir)) => {
            for c in report.failed_checks() {
                eprintln!("FAIL {}: {} (value {:e}, threshold {:e})", c.name, c.invariant, c.value, c.threshold);
            }
            eprintln!(
                "{}: {} passed, {} failed; wall clock {:.2}s; wrote {}",
                report.config.scenario,
                report.summary.passed,
                report.summary.failed,
                report.wall_clock.as_secs_f64(),
                dir.display()
            );
            if report.summary.all_pass {
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
