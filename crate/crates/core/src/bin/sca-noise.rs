use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sca_noise::runner::{
    cmd_allocate, cmd_attack, cmd_convexity, cmd_sweep, cmd_trace_gen, CommandOutput, GlobalOptions, RunError,
    RunResult,
};

/// Artificial-noise allocation against side-channel leakage.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (all cores when absent).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Allocate a noise budget over a channel file.
    Allocate,
    /// Compare uniform and optimal leakage over a budget grid.
    Sweep,
    /// Scan the convexity certificate of an input model.
    Convexity,
    /// Key-recovery success rates under each allocator.
    Attack,
    /// Write a synthetic trace file.
    TraceGen,
}

fn write_artifact(out: &CommandOutput, path: Option<&Path>) -> RunResult<()> {
    let io_err = |p: &Path, e| RunError::Input(sca_noise::error::Error::Io {
        path: p.to_path_buf(),
        source: e,
    });
    match path {
        Some(p) => std::fs::write(p, &out.artifact).map_err(|e| io_err(p, e))?,
        None => std::io::stdout()
            .write_all(&out.artifact)
            .map_err(|e| io_err(Path::new("<stdout>"), e))?,
    }
    if let Some(summary) = &out.summary {
        // a comment line, so a CSV on standard output stays parseable
        println!("# {summary}");
    }
    Ok(())
}

fn run(cli: Cli) -> RunResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    }
    let config = cli
        .config
        .as_deref()
        .ok_or_else(|| RunError::Config("--config is required".into()))?;
    let opts = GlobalOptions {
        seed: cli.seed,
        out: cli.out.clone(),
    };
    let output = match cli.command {
        Command::Allocate => cmd_allocate(config, &opts),
        Command::Sweep => cmd_sweep(config, &opts),
        Command::Convexity => cmd_convexity(config, &opts),
        Command::Attack => cmd_attack(config, &opts),
        Command::TraceGen => cmd_trace_gen(config, &opts),
    }?;
    write_artifact(&output, cli.out.as_deref())
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
