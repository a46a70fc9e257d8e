//! Experiment execution: single runs, design-space sweeps, report merging,
//! and cache management.
//!
//! Artifacts per run, all sorted by pair id so bytes are identical across
//! parallelism settings and cache states:
//!
//! - `transcripts.jsonl` - one full transcript per scored pair
//! - `predictions.jsonl` - one parsed decision per scored pair
//! - `errors.jsonl`      - per-pair failures (absent when everything passed)
//! - `report.json`       - the evaluation report with embedded provenance
//! - `report.csv`        - the same report as one CSV row

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{BackendKind, ConfigError, RunConfig};
use crate::datasets::{self, benchmarks, load_bundle, DatasetError};
use crate::decoding::{Decoder, MatchPrediction};
use crate::gateway::{
    DiskCache, FixtureBackend, Gateway, GatewayError, HeuristicBackend, NetworkBackend,
    NetworkConfig,
};
use crate::metrics::{emit_report, evaluate, EvalReport, MetricsError, ReportFormat};
use crate::prompts::{
    enumerate_variants, PromptError, PromptRenderer, PromptVariant, RenderOptions, TaskFrame,
    TemplateSet,
};
use crate::records::RecordPair;
use crate::strategies::{StrategyError, StrategyRunner, Transcript};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report {path} has schema version {found}, expected {expected}")]
    SchemaMismatch {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One pair's failure, as recorded in `errors.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairError {
    pub pair_id: String,
    pub step: String,
    pub message: String,
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: EvalReport,
    pub output_dir: PathBuf,
    pub n_errors: usize,
    /// Backend attempts made during this run; zero on a fully cached rerun.
    pub backend_calls: u64,
}

impl RunOutcome {
    /// Process exit code contract: 0 clean, 2 partial (some pairs errored).
    pub fn exit_code(&self) -> i32 {
        if self.n_errors > 0 {
            2
        } else {
            0
        }
    }
}

/// Seeded label-stratified sample of `n` pairs, preserving split order.
fn stratified_sample(pairs: &[RecordPair], n: usize, seed: u64) -> Vec<RecordPair> {
    if n >= pairs.len() {
        return pairs.to_vec();
    }
    let positives: Vec<usize> = (0..pairs.len())
        .filter(|&i| pairs[i].gold.map(|g| g.is_match()).unwrap_or(false))
        .collect();
    let negatives: Vec<usize> = (0..pairs.len())
        .filter(|&i| !pairs[i].gold.map(|g| g.is_match()).unwrap_or(false))
        .collect();
    let n_pos = ((n * positives.len()) as f64 / pairs.len() as f64).round() as usize;
    let n_pos = n_pos.min(positives.len()).min(n);
    let n_neg = (n - n_pos).min(negatives.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a_5a5a);
    let mut picked: Vec<usize> = Vec::with_capacity(n_pos + n_neg);
    picked.extend(
        rand::seq::index::sample(&mut rng, positives.len(), n_pos)
            .into_iter()
            .map(|i| positives[i]),
    );
    picked.extend(
        rand::seq::index::sample(&mut rng, negatives.len(), n_neg)
            .into_iter()
            .map(|i| negatives[i]),
    );
    picked.sort_unstable();
    picked.into_iter().map(|i| pairs[i].clone()).collect()
}

fn build_gateway(config: &RunConfig, templates: &TemplateSet) -> Result<Gateway, RunError> {
    let backend: Box<dyn crate::gateway::Backend> = match config.backend.kind {
        BackendKind::Heuristic => {
            Box::new(HeuristicBackend::with_scaffold(templates.scaffold.clone()))
        }
        BackendKind::Fixture => {
            let path = config
                .backend
                .fixture_path
                .as_ref()
                .expect("validated: fixture path present");
            Box::new(FixtureBackend::from_file(path)?)
        }
        BackendKind::Network => {
            let api_key = std::env::var(&config.backend.api_key_env).map_err(|_| {
                ConfigError::Invalid(format!(
                    "environment variable {} is not set",
                    config.backend.api_key_env
                ))
            })?;
            Box::new(NetworkBackend::new(NetworkConfig::new(
                config.backend.base_url.clone(),
                api_key,
            ))?)
        }
    };
    let mut builder = Gateway::builder(backend).retry(config.backend.retry_policy());
    if config.backend.cache {
        builder = builder.cache_dir(config.cache_dir());
    }
    if let Some(limit) = config.backend.rate_limit() {
        builder = builder.rate_limit(limit);
    }
    Ok(builder.build())
}

/// Resolves the domain word for domain-specific task frames.
fn resolve_domain(config: &RunConfig) -> Result<String, RunError> {
    if let Some(domain) = &config.dataset.domain {
        return Ok(domain.clone());
    }
    let id = config.dataset_id();
    if let Some(domain) = benchmarks::domain_of(&id) {
        return Ok(domain.to_string());
    }
    if config.variant.task_frame == TaskFrame::DomainSpecific {
        return Err(ConfigError::Invalid(format!(
            "dataset {id} is not a known benchmark; set dataset.domain for domain-specific frames"
        ))
        .into());
    }
    Ok("item".to_string())
}

fn load_templates(config: &RunConfig) -> Result<TemplateSet, RunError> {
    Ok(match &config.prompts.template_path {
        Some(path) => TemplateSet::load(path)?,
        None => TemplateSet::builtin(),
    })
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), RunError> {
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| RunError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        })?;
        writeln!(file, "{line}").map_err(io_err(path))?;
    }
    Ok(())
}

/// Runs one experiment end to end and writes its artifacts.
///
/// Per-pair backend errors are recorded and skipped; the run continues and
/// reports over the scored pairs. With caching on, a rerun serves every pair
/// from the cache and issues no backend calls.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    config.validate()?;
    let bundle = load_bundle(&config.dataset.path, config.dataset.format)?;
    let dataset_id = config.dataset_id();
    let domain = resolve_domain(config)?;
    let templates = load_templates(config)?;

    let renderer = PromptRenderer::new(
        templates.clone(),
        bundle.schema.clone(),
        domain,
        RenderOptions {
            style: config.prompts.style,
            hint_min_phrase_tokens: config.prompts.hint_min_phrase_tokens,
        },
    );
    let gateway = Arc::new(build_gateway(config, &templates)?);
    let runner = StrategyRunner::new(renderer, Arc::clone(&gateway))
        .with_params(config.backend.completion_params());

    let shots = datasets::sample_few_shot(&bundle, config.variant.shots, config.run.seed)?;
    let mut pairs: Vec<RecordPair> = bundle.split(config.dataset.split)?.to_vec();
    if let Some(limit) = config.run.limit {
        pairs.truncate(limit);
    }
    if let Some(sample) = config.run.sample {
        pairs = stratified_sample(&pairs, sample, config.run.seed);
    }

    let decoder = Decoder::new(config.decoding.unparseable_default);
    let strategy = config.run.strategy;
    let variant = config.variant;
    let frame = variant.response_frame;

    // Pair-level worker pool; each pair's turns stay sequential inside
    // StrategyRunner::run.
    let queue = Mutex::new(pairs.iter());
    let results = Mutex::new(Vec::with_capacity(pairs.len()));
    std::thread::scope(|scope| {
        for _ in 0..config.backend.parallelism.min(pairs.len().max(1)) {
            scope.spawn(|| loop {
                let next = { queue.lock().expect("queue lock").next() };
                let Some(pair) = next else { break };
                let outcome: Result<(Transcript, MatchPrediction), StrategyError> = runner
                    .run(strategy, pair, &variant, &shots)
                    .map(|transcript| {
                        let prediction = decoder.decide(&transcript, frame);
                        (transcript, prediction)
                    });
                results.lock().expect("results lock").push((pair, outcome));
            });
        }
    });

    let mut transcripts: Vec<Transcript> = Vec::new();
    let mut predictions: Vec<MatchPrediction> = Vec::new();
    let mut golds = Vec::new();
    let mut errors: Vec<PairError> = Vec::new();
    for (pair, outcome) in results.into_inner().expect("results lock") {
        match outcome {
            Ok((transcript, prediction)) => {
                transcripts.push(transcript);
                predictions.push(prediction);
                golds.push((
                    pair.pair_id.clone(),
                    pair.gold.expect("split pairs carry gold labels"),
                ));
            }
            Err(err) => errors.push(PairError {
                pair_id: pair.pair_id.clone(),
                step: err.step().to_string(),
                message: err.to_string(),
            }),
        }
    }
    transcripts.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    predictions.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    golds.sort();
    errors.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));

    let mut report = evaluate(
        &dataset_id,
        strategy,
        &variant,
        &predictions,
        &golds,
        &transcripts,
    )?;
    report.config = Some(config.provenance(&templates.version, &templates.content_hash()));

    let out = &config.run.output_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;
    write_jsonl(&out.join("transcripts.jsonl"), &transcripts)?;
    write_jsonl(&out.join("predictions.jsonl"), &predictions)?;
    if errors.is_empty() {
        // A stale errors file from an earlier partial run would mislead.
        let _ = fs::remove_file(out.join("errors.jsonl"));
    } else {
        write_jsonl(&out.join("errors.jsonl"), &errors)?;
    }
    let report_json = emit_report(&report, ReportFormat::Json)?;
    fs::write(out.join("report.json"), report_json).map_err(io_err(out))?;
    let report_csv = emit_report(&report, ReportFormat::Csv)?;
    fs::write(out.join("report.csv"), report_csv).map_err(io_err(out))?;

    Ok(RunOutcome {
        report,
        output_dir: out.clone(),
        n_errors: errors.len(),
        backend_calls: gateway.backend_calls(),
    })
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// A design-space axis selectable for sweeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    TaskFrame,
    Verbiage,
    ResponseFrame,
    Shots,
    Hints,
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "task_frame" => Ok(SweepAxis::TaskFrame),
            "verbiage" => Ok(SweepAxis::Verbiage),
            "response_frame" => Ok(SweepAxis::ResponseFrame),
            "shots" => Ok(SweepAxis::Shots),
            "hints" => Ok(SweepAxis::Hints),
            other => Err(format!("unknown sweep axis: {other}")),
        }
    }
}

/// The variants a sweep visits: the chosen axes range over their full
/// domains (shots over `shot_counts`), every other axis stays at the base
/// configuration's value.
pub fn sweep_variants(
    base: &PromptVariant,
    axes: &[SweepAxis],
    shot_counts: &[usize],
) -> Vec<PromptVariant> {
    let shot_counts = if shot_counts.is_empty() {
        vec![base.shots]
    } else {
        shot_counts.to_vec()
    };
    let mut variants: Vec<PromptVariant> = enumerate_variants(&shot_counts)
        .into_iter()
        .filter(|v| {
            (axes.contains(&SweepAxis::TaskFrame) || v.task_frame == base.task_frame)
                && (axes.contains(&SweepAxis::Verbiage) || v.verbiage == base.verbiage)
                && (axes.contains(&SweepAxis::ResponseFrame)
                    || v.response_frame == base.response_frame)
                && (axes.contains(&SweepAxis::Shots) || v.shots == base.shots)
                && (axes.contains(&SweepAxis::Hints) || v.hints == base.hints)
        })
        .collect();
    variants.dedup();
    variants
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub runs: Vec<RunOutcome>,
    pub failed_variants: Vec<(PromptVariant, String)>,
    pub comparison_csv: PathBuf,
    pub table: String,
}

/// Runs one experiment per variant, isolating per-variant failures, and
/// writes a combined comparison table.
pub fn cmd_sweep(
    config: &RunConfig,
    axes: &[SweepAxis],
    shot_counts: &[usize],
) -> Result<SweepOutcome, RunError> {
    assert!(!axes.is_empty(), "sweep needs at least one axis");
    let variants = sweep_variants(&config.variant, axes, shot_counts);
    let base_dir = config.run.output_dir.clone();
    fs::create_dir_all(&base_dir).map_err(io_err(&base_dir))?;

    let mut runs = Vec::new();
    let mut failed = Vec::new();
    for variant in variants {
        let mut sub = config.clone();
        sub.variant = variant;
        sub.run.output_dir = base_dir.join(variant.slug());
        if sub.backend.cache_dir.is_none() {
            // One shared cache across the sweep: variants reuse overlapping
            // prompts (e.g. hints off/on share nothing, shots do).
            sub.backend.cache_dir = Some(base_dir.join("cache"));
        }
        match cmd_run(&sub) {
            Ok(outcome) => runs.push(outcome),
            Err(err) => failed.push((variant, err.to_string())),
        }
    }

    let reports: Vec<&EvalReport> = runs.iter().map(|r| &r.report).collect();
    let mut csv = String::from(
        "dataset,strategy,task_frame,verbiage,response_frame,shots,hints,f1,precision,recall,\
         token_mean_per_pair,unparseable_rate,n_pairs\n",
    );
    for report in &reports {
        let v = report.variant;
        writeln!(
            csv,
            "{},{},{:?},{:?},{:?},{},{:?},{},{},{},{},{},{}",
            report.dataset_id,
            report.strategy,
            v.task_frame,
            v.verbiage,
            v.response_frame,
            v.shots,
            v.hints,
            report.f1,
            report.precision,
            report.recall,
            report.token_mean_per_pair,
            report.unparseable_rate,
            report.n_pairs
        )
        .expect("string write");
    }
    let comparison_csv = base_dir.join("comparison.csv");
    fs::write(&comparison_csv, csv).map_err(io_err(&comparison_csv))?;

    let mut table = format!(
        "{:<10} {:<12} {:<36} {:>7} {:>9}\n",
        "Dataset", "Method", "Variant", "F1", "# Tokens"
    );
    for report in &reports {
        writeln!(
            table,
            "{:<10} {:<12} {:<36} {:>7.3} {:>9}",
            report.dataset_id,
            report.strategy.to_string(),
            report.variant.slug(),
            report.f1,
            (report.token_mean_per_pair + 0.5).floor() as u64,
        )
        .expect("string write");
    }

    Ok(SweepOutcome {
        runs,
        failed_variants: failed,
        comparison_csv,
        table,
    })
}

// ---------------------------------------------------------------------------
// Report merging
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct MergedReport {
    pub table: String,
    pub csv: String,
}

/// Merges finished run directories into one table: a row per dataset (and
/// variant), with F1 and mean tokens per strategy side by side.
pub fn cmd_report(run_dirs: &[PathBuf]) -> Result<MergedReport, RunError> {
    if run_dirs.is_empty() {
        return Err(ConfigError::Invalid("no run directories given".to_string()).into());
    }
    let mut reports = Vec::new();
    for dir in run_dirs {
        let path = dir.join("report.json");
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let report: EvalReport = serde_json::from_str(&text).map_err(|e| RunError::Io {
            path: path.clone(),
            source: std::io::Error::other(e),
        })?;
        if report.version != crate::metrics::REPORT_SCHEMA_VERSION {
            return Err(RunError::SchemaMismatch {
                path,
                found: report.version,
                expected: crate::metrics::REPORT_SCHEMA_VERSION,
            });
        }
        reports.push(report);
    }

    // Row key: dataset plus variant; column group: strategy.
    let mut strategies: Vec<String> = reports.iter().map(|r| r.strategy.to_string()).collect();
    strategies.sort();
    strategies.dedup();
    let mut rows: BTreeMap<(String, String), BTreeMap<String, (f64, u64)>> = BTreeMap::new();
    for report in &reports {
        rows.entry((report.dataset_id.clone(), report.variant.slug()))
            .or_default()
            .insert(
                report.strategy.to_string(),
                (report.f1, (report.token_mean_per_pair + 0.5).floor() as u64),
            );
    }

    let mut table = format!("{:<10} {:<36}", "Dataset", "Variant");
    let mut csv = String::from("dataset,variant");
    for strategy in &strategies {
        write!(table, " {:>22}", format!("{strategy} F1 / # Tok")).expect("write");
        write!(csv, ",{strategy}_f1,{strategy}_tokens").expect("write");
    }
    table.push('\n');
    csv.push('\n');
    for ((dataset, variant), cells) in &rows {
        write!(table, "{dataset:<10} {variant:<36}").expect("write");
        write!(csv, "{dataset},{variant}").expect("write");
        for strategy in &strategies {
            match cells.get(strategy) {
                Some((f1, tokens)) => {
                    write!(table, " {:>22}", format!("{f1:.3} / {tokens}")).expect("write");
                    write!(csv, ",{f1},{tokens}").expect("write");
                }
                None => {
                    write!(table, " {:>22}", "-").expect("write");
                    csv.push_str(",,");
                }
            }
        }
        table.push('\n');
        csv.push('\n');
    }
    Ok(MergedReport { table, csv })
}

/// Deletes the completion cache for a configuration; returns entries removed.
pub fn cmd_cache_purge(config: &RunConfig) -> Result<usize, RunError> {
    Ok(DiskCache::new(config.cache_dir()).purge()?)
}

/// Convenience for tests and examples: synthesizes a benchmark stand-in into
/// `base_dir` and returns a config pointing at it.
pub fn config_for_benchmark(
    benchmark_id: &str,
    base_dir: &Path,
    output_dir: &Path,
) -> Result<RunConfig, RunError> {
    let spec = benchmarks::find(benchmark_id).ok_or_else(|| {
        RunError::from(ConfigError::Invalid(format!(
            "unknown benchmark: {benchmark_id}"
        )))
    })?;
    let dir = spec.materialize(base_dir)?;
    let mut config = RunConfig::default();
    config.dataset.path = dir;
    config.dataset.format = spec.format;
    config.dataset.id = Some(spec.id.to_string());
    config.run.output_dir = output_dir.to_path_buf();
    Ok(config)
}
