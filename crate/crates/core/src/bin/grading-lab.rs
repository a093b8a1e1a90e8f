use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grading_lab::dense::DEFAULT_CAP;
use grading_lab::lab::{cmd_block, cmd_decay, cmd_evolve, cmd_report, cmd_verify, ExperimentConfig, Outcome, RunOptions};
use grading_lab::LabError;

/// Deterministic experiments on d-graded lattice algebras.
#[derive(Parser)]
#[command(name = "grading-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (key = value lines). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path; overrides the config's `output`. Standard output otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest dense Hilbert-space dimension allowed.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Seed for randomized sampling in `verify`; never affects the physics.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Symbolic relation suite and printed-formula audit.
    Verify,
    /// Dense and one-particle evolution of a dressed generator.
    Evolve,
    /// Commutator decay of gauge-invariant and bare pairs.
    Decay,
    /// Regrouping into blocks of `block_k` sites.
    Block,
    /// Summary table of the CSVs listed under `inputs` (paths relative to the working directory).
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    faer::set_global_parallelism(faer::Par::Seq);

    let cfg = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            match ExperimentConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
        None => ExperimentConfig::default(),
    };
    let opts = RunOptions {
        cap: cli.cap,
        seed: cli.seed,
    };
    let result = match cli.command {
        Command::Verify => cmd_verify(&cfg, opts),
        Command::Evolve => cmd_evolve(&cfg, opts),
        Command::Decay => cmd_decay(&cfg, opts),
        Command::Block => cmd_block(&cfg, opts),
        Command::Report => cmd_report(&cfg, None),
    };
    let Outcome { csv, failures } = match result {
        Ok(o) => o,
        Err(e @ LabError::CapExceeded { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let out = cli.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => {
            use std::io::Write;
            if std::io::stdout().write_all(&csv).is_err() {
                return ExitCode::from(1);
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} assertion-tier failure(s)");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
