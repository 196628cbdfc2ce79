//! Command-line front end.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use crate::experiment::{run, Command, ExitCode, ExperimentConfig, Overrides, RunError};

#[derive(Debug, Parser)]
#[command(name = "randschro", version, about = "Fixed-point solver and Monte Carlo checks for nonlinear Schrödinger problems with random potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Compare the discrete H(1) with the torsion function.
    GreenCheck(RunArgs),
    /// Solve one realization by Picard iteration.
    Solve(RunArgs),
    /// Admissibility, norm and moment statistics over an ensemble.
    Ensemble(RunArgs),
    /// Kolmogorov–Smirnov test of standardized sums of solution norms.
    Clt(RunArgs),
    /// Chebyshev bound for averages of solution norms.
    Lln(RunArgs),
    /// Exceedance probabilities of a series measure.
    BorelCantelli(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Worker thread cap.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl CliCommand {
    fn split(&self) -> (Command, &RunArgs) {
        match self {
            CliCommand::GreenCheck(a) => (Command::GreenCheck, a),
            CliCommand::Solve(a) => (Command::Solve, a),
            CliCommand::Ensemble(a) => (Command::Ensemble, a),
            CliCommand::Clt(a) => (Command::Clt, a),
            CliCommand::Lln(a) => (Command::Lln, a),
            CliCommand::BorelCantelli(a) => (Command::BorelCantelli, a),
        }
    }
}

/// Runs the parsed command line and returns the exit status.
pub fn execute(cli: &Cli) -> ExitCode {
    let (command, args) = cli.command.split();
    let result = ExperimentConfig::load(&args.config).and_then(|mut config| {
        config.apply(&Overrides {
            seed: args.seed,
            out: args.out.clone(),
            h: args.h,
            n_samples: args.n_samples,
            threads: args.threads,
        });
        run(command, &config)
    });
    match result {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            for v in &outcome.verdicts {
                let _ = writeln!(out, "{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            report_error(command, &e);
            e.exit_code()
        }
    }
}

fn report_error(command: Command, e: &RunError) {
    eprintln!("randschro {}: {e}", command.name());
    if let RunError::Library(inner) = e {
        if let Some(i) = inner.sample_index() {
            eprintln!("offending sample index: {i}");
        }
    }
}
