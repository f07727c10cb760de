//! `cwm`: vocabulary, counting, training, evaluation and co-occurrence
//! diagnostics for contrastive word embeddings.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::*;

#[derive(Parser, Debug)]
#[command(name = "cwm", version, about = "Contrastive word model pipeline")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// TOML file of training settings; flags override it
    #[arg(long, global = true, env = "CWM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice
    #[arg(long, global = true, env = "CWM_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; 1 with a fixed seed is fully deterministic
    #[arg(long, global = true, env = "CWM_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a vocabulary file from a corpus
    Vocab(VocabArgs),
    /// Count windowed co-occurrences
    Count(CountArgs),
    /// Train embeddings
    Train(TrainArgs),
    /// Analogy scores, recovery and stratified recovery
    Eval(EvalArgs),
    /// Collinearity of one quadruple population, as plot data
    Zeta(ZetaArgs),
    /// Spearman correlation against human similarity ratings
    Simeval(SimevalArgs),
    /// Fixed-point residuals, norm-frequency fit and gamma statistics
    Diagnose(DiagnoseArgs),
    /// Synthetic corpus with planted analogy quadruples
    Synthesize(SynthesizeArgs),
}

/// Exit codes, one per error class.
mod exit {
    pub const OTHER: u8 = 1;
    pub const IO: u8 = 3;
    pub const FORMAT: u8 = 4;
    pub const INCOMPATIBLE: u8 = 5;
    pub const CONFIG: u8 = 6;
    pub const DATA: u8 = 7;
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use cwm::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Io(_) => exit::IO,
                E::Parse { .. } => exit::FORMAT,
                E::Incompatible(_) => exit::INCOMPATIBLE,
                E::InvalidConfig(_) | E::InvalidWindow(_) => exit::CONFIG,
                E::EmptyCorpus
                | E::DegenerateVector(_)
                | E::UnknownWord(_)
                | E::DegenerateWord(_)
                | E::DegeneratePair(..)
                | E::DegenerateMean
                | E::InsufficientNegatives { .. }
                | E::InsufficientCoverage { .. }
                | E::InfeasibleConstruction(_) => exit::DATA,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return exit::IO;
        }
    }
    exit::OTHER
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(exit::CONFIG);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let g = &cli.global;
    let res = match &cli.cmd {
        Command::Vocab(a) => cmd_vocab(g, a),
        Command::Count(a) => cmd_count(g, a),
        Command::Train(a) => cmd_train(g, a),
        Command::Eval(a) => cmd_eval(g, a),
        Command::Zeta(a) => cmd_zeta(g, a),
        Command::Simeval(a) => cmd_simeval(g, a),
        Command::Diagnose(a) => cmd_diagnose(g, a),
        Command::Synthesize(a) => cmd_synthesize(g, a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
