//! Confusion-matrix metrics and token-cost aggregation.
//!
//! Inputs are sorted by pair id before aggregation, so results are
//! independent of completion order. Zero-denominator cases never apply a
//! silent convention: splits with no true positives and no errors are
//! reported with an explicit degenerate flag.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoding::{MatchPrediction, ParseStatus};
use crate::gateway::Usage;
use crate::prompts::PromptVariant;
use crate::records::GoldLabel;
use crate::strategies::{StrategyKind, Transcript};

/// Bumped whenever the report schema changes shape; merging refuses to mix
/// versions.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("length mismatch: {predictions} predictions vs {golds} gold labels")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("prediction pair id {0:?} has no gold label")]
    UnknownPairId(String),
    #[error("unsupported report format: {0}")]
    UnsupportedFormat(String),
    #[error("report emission failed: {0}")]
    Emit(String),
}

/// Exact confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    #[serde(rename = "tp")]
    pub true_pos: usize,
    #[serde(rename = "fp")]
    pub false_pos: usize,
    #[serde(rename = "tn")]
    pub true_neg: usize,
    #[serde(rename = "fn")]
    pub false_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Joins predictions with gold labels by pair id (order-insensitive) and
/// counts the confusion cells.
pub fn confusion(
    predictions: &[MatchPrediction],
    golds: &[(String, GoldLabel)],
) -> Result<ConfusionCounts, MetricsError> {
    if predictions.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    let mut predictions: Vec<&MatchPrediction> = predictions.iter().collect();
    predictions.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    let mut golds: Vec<&(String, GoldLabel)> = golds.iter().collect();
    golds.sort_by(|a, b| a.0.cmp(&b.0));

    let mut counts = ConfusionCounts::default();
    for (prediction, (gold_id, gold)) in predictions.iter().zip(&golds) {
        if prediction.pair_id != *gold_id {
            return Err(MetricsError::UnknownPairId(prediction.pair_id.clone()));
        }
        match (prediction.decision.is_match(), gold.is_match()) {
            (true, true) => counts.true_pos += 1,
            (true, false) => counts.false_pos += 1,
            (false, true) => counts.false_neg += 1,
            (false, false) => counts.true_neg += 1,
        }
    }
    Ok(counts)
}

/// Precision, recall, and F1 with explicit degenerate handling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True when the split carries no positive signal at all
    /// (tp = fp = fn = 0), where the scores are conventions, not
    /// measurements.
    pub degenerate: bool,
}

/// Computes precision, recall, and F1 from confusion counts. With `tp = 0`
/// and any of `fp`/`fn` positive, all three scores are 0; with
/// `tp = fp = fn = 0` the split is flagged degenerate instead of silently
/// scoring 1.
pub fn prf(counts: &ConfusionCounts) -> PrfScores {
    let tp = counts.true_pos as f64;
    if counts.true_pos == 0 {
        let degenerate = counts.false_pos == 0 && counts.false_neg == 0;
        return PrfScores {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            degenerate,
        };
    }
    let precision = tp / (tp + counts.false_pos as f64);
    let recall = tp / (tp + counts.false_neg as f64);
    let f1 = 2.0 * precision * recall / (precision + recall);
    PrfScores {
        precision,
        recall,
        f1,
        degenerate: false,
    }
}

/// Token totals and the per-pair mean for a set of transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenReport {
    pub total: Usage,
    /// `(input + output) / n_pairs`; 0 when there are no pairs.
    pub mean_per_pair: f64,
    /// The mean rounded half-up to an integer, the tables' presentation.
    pub mean_rounded: u64,
    pub n_pairs: usize,
}

/// Exact sums of per-transcript usage plus the per-pair mean.
pub fn token_report(transcripts: &[Transcript]) -> TokenReport {
    let mut total = Usage::default();
    for transcript in transcripts {
        total.merge(transcript.total_usage);
    }
    let n_pairs = transcripts.len();
    let mean_per_pair = if n_pairs == 0 {
        0.0
    } else {
        total.total() as f64 / n_pairs as f64
    };
    TokenReport {
        total,
        mean_per_pair,
        mean_rounded: (mean_per_pair + 0.5).floor() as u64,
        n_pairs,
    }
}

/// Fraction of predictions that fell back to the configured default.
pub fn unparseable_rate(predictions: &[MatchPrediction]) -> f64 {
    if predictions.is_empty() {
        return 0.0;
    }
    let defaulted = predictions
        .iter()
        .filter(|p| p.parse_status == ParseStatus::UnparseableDefaulted)
        .count();
    defaulted as f64 / predictions.len() as f64
}

/// The full evaluation result for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub dataset_id: String,
    pub strategy: StrategyKind,
    pub variant: PromptVariant,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
    pub token_total: Usage,
    pub token_mean_per_pair: f64,
    pub unparseable_rate: f64,
    pub n_pairs: usize,
    /// The resolved run configuration, embedded for provenance. Execution
    /// knobs that cannot change results (parallelism, paths) are excluded so
    /// equivalent runs produce identical reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

/// Builds the report for one run from its predictions, gold labels, and
/// transcripts.
pub fn evaluate(
    dataset_id: &str,
    strategy: StrategyKind,
    variant: &PromptVariant,
    predictions: &[MatchPrediction],
    golds: &[(String, GoldLabel)],
    transcripts: &[Transcript],
) -> Result<EvalReport, MetricsError> {
    let counts = confusion(predictions, golds)?;
    let scores = prf(&counts);
    let tokens = token_report(transcripts);
    Ok(EvalReport {
        version: REPORT_SCHEMA_VERSION,
        dataset_id: dataset_id.to_string(),
        strategy,
        variant: *variant,
        counts,
        precision: scores.precision,
        recall: scores.recall,
        f1: scores.f1,
        degenerate: scores.degenerate,
        token_total: tokens.total,
        token_mean_per_pair: tokens.mean_per_pair,
        unparseable_rate: unparseable_rate(predictions),
        n_pairs: predictions.len(),
        config: None,
    })
}

/// Report output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Table,
}

impl FromStr for ReportFormat {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "table" => Ok(ReportFormat::Table),
            other => Err(MetricsError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Serializes a report. JSON round-trips losslessly; CSV is one header row
/// plus one data row; the table format mirrors the F1 / token presentation
/// of the result tables, with F1 at three decimals.
pub fn emit_report(report: &EvalReport, format: ReportFormat) -> Result<Vec<u8>, MetricsError> {
    match format {
        ReportFormat::Json => {
            serde_json::to_vec_pretty(report).map_err(|e| MetricsError::Emit(e.to_string()))
        }
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            let fields = [
                "version",
                "dataset",
                "strategy",
                "variant",
                "tp",
                "fp",
                "tn",
                "fn",
                "precision",
                "recall",
                "f1",
                "degenerate",
                "input_tokens",
                "output_tokens",
                "token_mean_per_pair",
                "unparseable_rate",
                "n_pairs",
            ];
            writer
                .write_record(fields)
                .and_then(|_| {
                    writer.write_record([
                        report.version.to_string(),
                        report.dataset_id.clone(),
                        report.strategy.to_string(),
                        report.variant.slug(),
                        report.counts.true_pos.to_string(),
                        report.counts.false_pos.to_string(),
                        report.counts.true_neg.to_string(),
                        report.counts.false_neg.to_string(),
                        report.precision.to_string(),
                        report.recall.to_string(),
                        report.f1.to_string(),
                        report.degenerate.to_string(),
                        report.token_total.input_tokens.to_string(),
                        report.token_total.output_tokens.to_string(),
                        report.token_mean_per_pair.to_string(),
                        report.unparseable_rate.to_string(),
                        report.n_pairs.to_string(),
                    ])
                })
                .map_err(|e| MetricsError::Emit(e.to_string()))?;
            writer
                .into_inner()
                .map_err(|e| MetricsError::Emit(e.to_string()))
        }
        ReportFormat::Table => {
            let mut out = String::new();
            let mean = (report.token_mean_per_pair + 0.5).floor() as u64;
            writeln!(
                out,
                "{:<10} {:<12} {:<36} {:>7} {:>9}",
                "Dataset", "Method", "Variant", "F1", "# Tokens"
            )
            .ok();
            writeln!(
                out,
                "{:<10} {:<12} {:<36} {:>7.3} {:>9}",
                report.dataset_id,
                report.strategy.to_string(),
                report.variant.slug(),
                report.f1,
                mean
            )
            .ok();
            if report.degenerate {
                writeln!(out, "(degenerate split: no positive signal)").ok();
            }
            Ok(out.into_bytes())
        }
    }
}
