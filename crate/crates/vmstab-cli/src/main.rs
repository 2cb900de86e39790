use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use vmstab_cli::{run_pipeline, Command, LoadedConfig};

/// Spectral instability analysis of periodic Vlasov-Maxwell equilibria.
#[derive(Parser)]
#[command(name = "vmstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve for the equilibrium fields and dump them with residuals.
    Equilibrium(Args),
    /// Evaluate the instability criterion from the lambda = 0 operators.
    Criterion(Args),
    /// Scan in lambda, locate the kernel crossing and rebuild the growing mode.
    Mode(Args),
    /// Repeat the criterion at refined resolutions.
    Convergence(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: output.dir from the config, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: VMSTAB_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed of the random control vector in `mode`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("VMSTAB_THREADS") {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("VMSTAB_THREADS = {v:?} is not a count"))?)),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<u8> {
    let (command, args) = match cli.command {
        Cmd::Equilibrium(a) => (Command::Equilibrium, a),
        Cmd::Criterion(a) => (Command::Criterion, a),
        Cmd::Mode(a) => (Command::Mode, a),
        Cmd::Convergence(a) => (Command::Convergence, a),
    };
    if let Some(n) = threads(args.threads)? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = LoadedConfig::from_path(&args.config)?;
    for w in cfg.config.warnings() {
        eprintln!("warning: {w}");
    }
    let out = args.out.or_else(|| cfg.config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let outcome = run_pipeline(&cfg, command, &out, args.seed)?;
    if let Some(v) = outcome.verdict {
        eprintln!("verdict: {}", serde_json::to_value(v)?.as_str().unwrap_or("?"));
    }
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
