//! `lorenz-lab`: batch entry point for the stochastic Lorenz stability laboratory.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a run
//! errors, 2 on configuration errors (nothing is written in that case).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Outcome, RunError};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "lorenz-lab", version, about = "Stability laboratory for the stochastic Lorenz '63 system")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 picks one per core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory and write it as CSV.
    Simulate,
    /// Compare autodiff generators against finite differences and closed forms.
    GeneratorCheck,
    /// Construct and check a Lyapunov certificate.
    Certificate {
        #[command(subcommand)]
        kind: CertificateKind,
    },
    /// Build the Lie bracket hierarchy and test whether it spans.
    Brackets,
    /// Monte Carlo hitting times of a target set.
    HittingTime,
    /// Empirical stationary law from one long trajectory.
    Stationary,
    /// Drift diagnostic for the degenerate-noise, undamped case.
    DiagnoseDegenerate,
}

#[derive(Subcommand)]
enum CertificateKind {
    /// Search (or verify) the recurrence Lyapunov function; needs beta = 0, gamma1 > 0.
    Recurrence,
    /// Check the two-function transience hypotheses; needs beta < 0.
    Transience,
}

fn resolve(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn write_files(dir: &Path, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("cannot start worker pool: {e}");
        return ExitCode::from(1);
    }

    let result = match &cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::GeneratorCheck => commands::generator_check(&cfg),
        Command::Certificate { kind } => match kind {
            CertificateKind::Recurrence => commands::certificate_recurrence(&cfg),
            CertificateKind::Transience => commands::certificate_transience(&cfg),
        },
        Command::Brackets => commands::brackets(&cfg),
        Command::HittingTime => commands::hitting_time(&cfg),
        Command::Stationary => commands::stationary(&cfg),
        Command::DiagnoseDegenerate => commands::diagnose_degenerate(&cfg),
    };
    match result {
        Ok(Outcome { pass, summary, files }) => {
            if let Err(e) = write_files(&cfg.out, &files) {
                eprintln!("cannot write to {}: {e}", cfg.out.display());
                return ExitCode::from(1);
            }
            // Status lines are best effort; a closed stdout must not change the exit code.
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{} {summary}", if pass { "PASS" } else { "FAIL" });
            for (name, _) in &files {
                let _ = writeln!(stdout, "wrote {}", cfg.out.join(name).display());
            }
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(RunError::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(RunError::Failed(e)) => {
            eprintln!("run failed: {e}");
            ExitCode::from(1)
        }
    }
}
