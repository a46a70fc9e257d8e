//! Thin command-line wrapper over the library's runner.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 partial run (some
//! pairs errored; artifacts and report cover the scored pairs).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stepmatch::config::{BackendKind, RunConfig};
use stepmatch::datasets::{DatasetFormat, Split};
use stepmatch::metrics::{emit_report, ReportFormat};
use stepmatch::prompts::{Hints, ResponseFrame, TaskFrame, Verbiage};
use stepmatch::runner::{cmd_cache_purge, cmd_report, cmd_run, cmd_sweep, SweepAxis};
use stepmatch::strategies::StrategyKind;

#[derive(Parser)]
#[command(
    name = "stepmatch",
    about = "LLM entity matching with staged reasoning strategies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write transcripts, predictions, and a report.
    Run(RunArgs),
    /// Run one experiment per design-space variant and write a comparison.
    Sweep(SweepArgs),
    /// Merge finished run directories into one table.
    Report {
        /// Run directories containing report.json files.
        run_dirs: Vec<PathBuf>,
        /// Also write the merged table as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Completion-cache maintenance.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    /// Delete all cached completions for a configuration.
    Purge(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (TOML). Flags below override its values.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,

    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    format: Option<DatasetFormat>,
    #[arg(long)]
    split: Option<Split>,
    #[arg(long)]
    dataset_id: Option<String>,
    #[arg(long)]
    domain: Option<String>,

    #[arg(long)]
    strategy: Option<StrategyKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Evaluate only the first N pairs.
    #[arg(long)]
    limit: Option<usize>,
    /// Evaluate a seeded label-stratified sample of N pairs.
    #[arg(long)]
    sample: Option<usize>,

    #[arg(long)]
    task_frame: Option<TaskFrame>,
    #[arg(long)]
    verbiage: Option<Verbiage>,
    #[arg(long)]
    response_frame: Option<ResponseFrame>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    hints: Option<Hints>,

    #[arg(long)]
    backend: Option<BackendKind>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f32>,
    #[arg(long)]
    max_output_tokens: Option<u32>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Disable the completion cache.
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Confirm that network backends may issue paid API calls.
    #[arg(long)]
    live: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, String> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path).map_err(|e| e.to_string())?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.dataset {
            config.dataset.path = v.clone();
        }
        if let Some(v) = self.format {
            config.dataset.format = v;
        }
        if let Some(v) = self.split {
            config.dataset.split = v;
        }
        if let Some(v) = &self.dataset_id {
            config.dataset.id = Some(v.clone());
        }
        if let Some(v) = &self.domain {
            config.dataset.domain = Some(v.clone());
        }
        if let Some(v) = self.strategy {
            config.run.strategy = v;
        }
        if let Some(v) = self.seed {
            config.run.seed = v;
        }
        if let Some(v) = &self.output {
            config.run.output_dir = v.clone();
        }
        if let Some(v) = self.limit {
            config.run.limit = Some(v);
        }
        if let Some(v) = self.sample {
            config.run.sample = Some(v);
        }
        if let Some(v) = self.task_frame {
            config.variant.task_frame = v;
        }
        if let Some(v) = self.verbiage {
            config.variant.verbiage = v;
        }
        if let Some(v) = self.response_frame {
            config.variant.response_frame = v;
        }
        if let Some(v) = self.shots {
            config.variant.shots = v;
        }
        if let Some(v) = self.hints {
            config.variant.hints = v;
        }
        if let Some(v) = self.backend {
            config.backend.kind = v;
        }
        if let Some(v) = &self.model {
            config.backend.model = v.clone();
        }
        if let Some(v) = self.temperature {
            config.backend.temperature = v;
        }
        if let Some(v) = self.max_output_tokens {
            config.backend.max_output_tokens = v;
        }
        if let Some(v) = self.parallelism {
            config.backend.parallelism = v;
        }
        if let Some(v) = &self.cache_dir {
            config.backend.cache_dir = Some(v.clone());
        }
        if self.no_cache {
            config.backend.cache = false;
        }
        if let Some(v) = &self.fixture {
            config.backend.fixture_path = Some(v.clone());
        }
        if let Some(v) = &self.templates {
            config.prompts.template_path = Some(v.clone());
        }
        if self.live {
            config.backend.live = true;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Axes to vary, comma separated:
    /// task_frame,verbiage,response_frame,shots,hints.
    #[arg(long, value_delimiter = ',', required = true)]
    axes: Vec<SweepAxis>,
    /// Shot counts visited when sweeping the shots axis.
    #[arg(long, value_delimiter = ',', default_values_t = [0usize, 2])]
    shot_counts: Vec<usize>,
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let config = match args.config.resolve() {
                Ok(config) => config,
                Err(e) => return fail(e),
            };
            if config.backend.kind == BackendKind::Network {
                eprintln!(
                    "live run: ~{} pairs x {} prompt(s) against {}; token costs apply",
                    config
                        .run
                        .sample
                        .or(config.run.limit)
                        .map_or_else(|| "all".to_string(), |n| n.to_string()),
                    config.run.strategy.step_sequence().len(),
                    config.backend.model
                );
            }
            match cmd_run(&config) {
                Ok(outcome) => {
                    match emit_report(&outcome.report, ReportFormat::Table) {
                        Ok(bytes) => print!("{}", String::from_utf8_lossy(&bytes)),
                        Err(e) => return fail(e),
                    }
                    eprintln!(
                        "wrote {} ({} pairs, {} errors, {} backend calls)",
                        outcome.output_dir.display(),
                        outcome.report.n_pairs,
                        outcome.n_errors,
                        outcome.backend_calls
                    );
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Command::Sweep(args) => {
            let config = match args.config.resolve() {
                Ok(config) => config,
                Err(e) => return fail(e),
            };
            match cmd_sweep(&config, &args.axes, &args.shot_counts) {
                Ok(outcome) => {
                    print!("{}", outcome.table);
                    eprintln!("wrote {}", outcome.comparison_csv.display());
                    for (variant, message) in &outcome.failed_variants {
                        eprintln!("variant {} failed: {message}", variant.slug());
                    }
                    if outcome.failed_variants.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Report { run_dirs, csv } => match cmd_report(&run_dirs) {
            Ok(merged) => {
                print!("{}", merged.table);
                if let Some(path) = csv {
                    if let Err(e) = std::fs::write(&path, merged.csv) {
                        return fail(format!("{}: {e}", path.display()));
                    }
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Cache { action } => match action {
            CacheAction::Purge(args) => match args
                .resolve()
                .and_then(|config| cmd_cache_purge(&config).map_err(|e| e.to_string()))
            {
                Ok(removed) => {
                    eprintln!("removed {removed} cached completions");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            },
        },
    }
}
