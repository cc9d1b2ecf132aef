//! Batch front door. Parses a flat config, runs the requested convergence
//! suites, and writes CSV tables, verdict lines, and plot-ready profiles.
//!
//! Exit codes: 0 all asserted invariants passed, 1 an invariant failed (the
//! verdict file names it), 2 configuration error.

mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Suite};
use report::ReportSink;

#[derive(Parser)]
#[command(name = "taulab", version, about = "convergence laboratory for regularized operator dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key=value run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled operators; overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every suite selected in the config.
    Run(Common),
    /// Sufficient-condition verdicts only.
    Certify(Common),
    /// Propagator and evolution convergence profiles only.
    Evolve(Common),
    /// Conjugation-membership tables only.
    Membership(Common),
    /// Gibbs-state profiles only.
    Gibbs(Common),
    /// Evolution and Gibbs profiles over the full parameter grids.
    Sweep(Common),
}

fn load(common: &Common) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| format!("cannot read {}: {e}", common.config.display()))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| e.to_string())?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn execute(common: &Common, suites: Option<Vec<Suite>>) -> ExitCode {
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let selected = suites.unwrap_or_else(|| cfg.suites.clone());
    let mut sink = ReportSink::new(cfg.out_dir.clone());
    if let Err(e) = runner::run(&cfg, &selected, &mut sink) {
        eprintln!("run failed: {}", e.0);
        return ExitCode::from(2);
    }
    if let Err(e) = sink.write_all() {
        eprintln!("cannot write reports: {e}");
        return ExitCode::from(2);
    }
    if sink.has_failures() {
        for f in sink.failures() {
            eprintln!("{f}");
        }
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(c) => execute(c, None),
        Command::Certify(c) => execute(c, Some(vec![Suite::Certify])),
        Command::Evolve(c) => execute(c, Some(vec![Suite::Evolve])),
        Command::Membership(c) => execute(c, Some(vec![Suite::Membership])),
        Command::Gibbs(c) => execute(c, Some(vec![Suite::Gibbs])),
        Command::Sweep(c) => execute(c, Some(vec![Suite::Evolve, Suite::Gibbs])),
    }
}
