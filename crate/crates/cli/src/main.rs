use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pepo_cli::commands::{cmd_anneal, cmd_exact_ising, cmd_ising_bench, cmd_oracle, cmd_scan};
use pepo_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "pepo", version, about = "Thermal states of 2D lattice models from annealed PEPOs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for scans; overrides the config.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Reserved: nothing in the pipeline is stochastic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Continue an anneal from a snapshot file.
    #[arg(long, global = true)]
    resume: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One anneal, measured at every checkpoint.
    Anneal,
    /// Anneals over a chemical-potential grid at several temperatures.
    Scan,
    /// Annealed and exact Ising magnetizations against the closed form.
    IsingBench,
    /// Measures the exact D = 2 Ising state.
    ExactIsing,
    /// Dense small-lattice reference checks.
    Oracle,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(seed) = cli.seed {
        log::debug!("seed {seed} ignored");
    }
    if matches!(cli.command, Command::Oracle) {
        return cmd_oracle(cli.out.as_deref());
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        cfg.workers = w;
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    let out = out.as_deref();
    if cli.resume.is_some() && !matches!(cli.command, Command::Anneal) {
        return Err(CliError::Usage("--resume only applies to anneal".into()));
    }
    match cli.command {
        Command::Anneal => cmd_anneal(&cfg, out, cli.resume.as_deref()),
        Command::Scan => cmd_scan(&cfg, out, cfg.workers),
        Command::IsingBench => cmd_ising_bench(&cfg, out),
        Command::ExactIsing => cmd_exact_ising(&cfg, out),
        Command::Oracle => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
