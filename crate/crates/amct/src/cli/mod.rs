//! Operator surface: one subcommand per pipeline stage, so ablations
//! (forced pathway, filter off) are re-runs of single stages against the
//! same artifacts.
//!
//! Exit codes: 0 success, 1 validation error (config, arguments, input
//! parsing), 2 runtime failure.

pub mod commands;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{CliError, CliResult};
pub use manifest::{RunManifest, StageCounts};

#[derive(Parser)]
#[command(
    name = "amct",
    version,
    about = "Adaptive multilingual chain-of-thought data pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate the candidate pool (direct + cross-lingual) per prompt.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Prompts, one JSON object per line.
        #[arg(long)]
        prompts: PathBuf,
        /// Output candidates file (JSONL).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score candidates with the reward model, filter, and select the best.
    Rank {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        prompts: PathBuf,
        /// Candidates produced by `generate`.
        #[arg(long)]
        candidates: PathBuf,
        /// Output selected-candidates file (JSONL).
        #[arg(long)]
        out: PathBuf,
        /// Also persist the full ranked pool here.
        #[arg(long)]
        pool_out: Option<PathBuf>,
    },
    /// Turn selected candidates into the marker-formatted training dataset.
    BuildDataset {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        prompts: PathBuf,
        /// Selected candidates produced by `rank`.
        #[arg(long)]
        selected: PathBuf,
        /// Output dataset file (JSONL, versioned schema).
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate model outputs: accuracy, consistency, judge scores.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Evaluation items: {id, group_id?, language, question, choices?, gold?}.
        #[arg(long)]
        eval_data: PathBuf,
        /// Model outputs: {id, output}.
        #[arg(long)]
        outputs: PathBuf,
        /// Report directory (records.jsonl, report.csv, report.txt).
        #[arg(long)]
        report_out: PathBuf,
        /// Label for the model column; defaults to the outputs file stem.
        #[arg(long)]
        model_label: Option<String>,
    },
    /// Routing distribution and base-vs-tuned transition analytics.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Base-model eval records (records.jsonl from `eval`).
        #[arg(long)]
        base: PathBuf,
        /// Tuned-model eval records.
        #[arg(long)]
        tuned: PathBuf,
        #[arg(long)]
        report_out: PathBuf,
    },
    /// Logit-lens grids and embedding geometry from exported tensors.
    Introspect {
        #[arg(long)]
        config: PathBuf,
        /// Hidden-state dump (binary, AMCT format).
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Unembedding matrix (binary, AMCT format); pairs with --dump.
        #[arg(long)]
        unembed: Option<PathBuf>,
        /// Labeled embeddings (JSONL {label, vector}).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Reference language for the centroid gap; pairs with --embeddings.
        #[arg(long)]
        reference: Option<String>,
        #[arg(long)]
        report_out: PathBuf,
    },
}

async fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate { config, prompts, out } => {
            commands::cmd_generate(config, prompts, out).await
        }
        Command::Rank { config, prompts, candidates, out, pool_out } => {
            commands::cmd_rank(config, prompts, candidates, out, pool_out.as_deref()).await
        }
        Command::BuildDataset { config, prompts, selected, out } => {
            commands::cmd_build_dataset(config, prompts, selected, out).await
        }
        Command::Eval { config, eval_data, outputs, report_out, model_label } => {
            commands::cmd_eval(config, eval_data, outputs, report_out, model_label.as_deref())
                .await
        }
        Command::Analyze { config, base, tuned, report_out } => {
            commands::cmd_analyze(config, base, tuned, report_out).await
        }
        Command::Introspect { config, dump, unembed, embeddings, reference, report_out } => {
            commands::cmd_introspect(
                config,
                dump.as_deref(),
                unembed.as_deref(),
                embeddings.as_deref(),
                reference.as_deref(),
                report_out,
            )
            .await
        }
    }
}

/// Parse arguments, run the subcommand, and map the outcome to an exit
/// code (0 success, 1 validation, 2 runtime).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return 1;
        }
        Err(e) => {
            // --help and --version land here.
            let _ = e.print();
            return 0;
        }
    };
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("failed to start async runtime: {e}");
            return 2;
        }
    };
    match runtime.block_on(dispatch(cli)) {
        Ok(()) => 0,
        Err(CliError::Validation(message)) => {
            eprintln!("error: {message}");
            1
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            2
        }
    }
}
