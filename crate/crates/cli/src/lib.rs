//! Configuration, dataset loaders and report writing around `robustopt-core`.

pub mod config;
pub mod edgelist;
pub mod error;
pub mod experiment;
pub mod idx;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, ExperimentKind, Overrides, OUTPUT_DIR_ENV};
pub use edgelist::{load_edge_list, parse_edge_list, EdgeList};
pub use error::{CliError, CliResult, EdgeListError, IdxError};
pub use experiment::{execute, run_experiment, run_seed};
pub use idx::{load_idx, load_idx_images, load_idx_labels, load_labeled, IdxData, IdxImages};
pub use report::{emit_csv, RunReport};

#[derive(Debug, Parser)]
#[command(name = "robustopt", version, about = "Run robust optimization experiments and summarize their reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a TOML config and write its CSV report.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        /// Overrides both the config and the environment variable.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Summarize the report directories under a path.
    Report { dir: PathBuf },
}

fn load(path: &PathBuf, overrides: &Overrides) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(overrides, std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from));
    cfg.validate()?;
    Ok(cfg)
}

/// Executes one command, returning the text to print on success.
pub fn dispatch(command: Command) -> CliResult<String> {
    match command {
        Command::Run {
            config,
            seed,
            runs,
            output_dir,
        } => {
            let cfg = load(&config, &Overrides { seed, runs, output_dir })?;
            let dir = cfg.output_path()?;
            let report = execute(&cfg)?;
            let failed = report.failed_checks();
            let mut out = format!(
                "{} runs of {} written to {} (config {})\n",
                cfg.runs,
                cfg.kind.name(),
                dir.display(),
                &report.config_hash[..12]
            );
            for c in &failed {
                out.push_str(&format!("check failed: run {} {}: {} > {}\n", c.run, c.name, c.lhs, c.rhs));
            }
            Ok(out)
        }
        Command::Validate { config } => {
            let cfg = load(&config, &Overrides::default())?;
            Ok(format!("{}: ok ({}, config {})\n", config.display(), cfg.kind.name(), &cfg.hash()?[..12]))
        }
        Command::Report { dir } => report::summarize(&dir),
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
