//! Experiment configuration: one TOML file, overridable from the command
//! line, resolved into everything a run needs.
//!
//! The science-relevant part of a resolved configuration (dataset, strategy,
//! variant, seed, backend identity, sampling parameters, wording version) is
//! embedded into every report for provenance. Execution knobs that cannot
//! change results (parallelism, rate limits, directory locations) are
//! deliberately excluded so equivalent runs emit identical reports.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{DatasetFormat, Split};
use crate::decoding::Decision;
use crate::gateway::{RateLimit, RetryPolicy};
use crate::prompts::PromptVariant;
use crate::records::SerializationStyle;
use crate::strategies::{CompletionParams, StrategyKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Which completion backend a run talks to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Network,
    Fixture,
    Heuristic,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "network" => Ok(BackendKind::Network),
            "fixture" => Ok(BackendKind::Fixture),
            "heuristic" => Ok(BackendKind::Heuristic),
            other => Err(format!("unknown backend kind: {other}")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSection {
    pub path: PathBuf,
    pub format: DatasetFormat,
    pub split: Split,
    /// Overrides the dataset id derived from the directory name.
    pub id: Option<String>,
    /// Domain word for domain-specific task frames; defaults from the
    /// benchmark catalog when the id is a known benchmark.
    pub domain: Option<String>,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            path: PathBuf::new(),
            format: DatasetFormat::Deepmatcher,
            split: Split::Test,
            id: None,
            domain: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub strategy: StrategyKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Evaluate only the first N pairs of the split.
    pub limit: Option<usize>,
    /// Evaluate a seeded label-stratified sample of N pairs of the split.
    pub sample: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::Baseline,
            seed: 7,
            output_dir: PathBuf::from("runs/out"),
            limit: None,
            sample: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendSection {
    pub kind: BackendKind,
    pub model: String,
    pub temperature: f32,
    pub max_output_tokens: u32,
    /// Environment variable holding the API key for the network backend.
    pub api_key_env: String,
    pub base_url: String,
    pub retry_max_attempts: u32,
    pub retry_base_ms: u64,
    pub parallelism: usize,
    pub rate_limit_requests: Option<u32>,
    pub rate_limit_per_secs: u64,
    pub cache: bool,
    /// Cache location; defaults to `<output_dir>/cache`.
    pub cache_dir: Option<PathBuf>,
    /// Response map for the fixture backend.
    pub fixture_path: Option<PathBuf>,
    /// Explicit opt-in for network calls.
    pub live: bool,
}

impl Default for BackendSection {
    fn default() -> Self {
        Self {
            kind: BackendKind::Heuristic,
            model: "gpt-5.1-mini".to_string(),
            temperature: 0.0,
            max_output_tokens: 1024,
            api_key_env: "OPENAI_API_KEY".to_string(),
            base_url: "https://api.openai.com/v1".to_string(),
            retry_max_attempts: 3,
            retry_base_ms: 250,
            parallelism: 4,
            rate_limit_requests: None,
            rate_limit_per_secs: 60,
            cache: true,
            cache_dir: None,
            fixture_path: None,
            live: false,
        }
    }
}

impl BackendSection {
    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_attempts: self.retry_max_attempts.max(1),
            base_delay: Duration::from_millis(self.retry_base_ms),
            max_delay: Duration::from_secs(30),
        }
    }

    pub fn rate_limit(&self) -> Option<RateLimit> {
        self.rate_limit_requests.map(|requests| RateLimit {
            requests,
            per: Duration::from_secs(self.rate_limit_per_secs.max(1)),
        })
    }

    pub fn completion_params(&self) -> CompletionParams {
        CompletionParams {
            model: self.model.clone(),
            temperature: self.temperature,
            max_output_tokens: self.max_output_tokens,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptSection {
    /// Template TOML path; the built-in wording is used when unset.
    pub template_path: Option<PathBuf>,
    pub style: SerializationStyle,
    pub hint_min_phrase_tokens: usize,
}

impl Default for PromptSection {
    fn default() -> Self {
        Self {
            template_path: None,
            style: SerializationStyle::LabeledLines,
            hint_min_phrase_tokens: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodingSection {
    pub unparseable_default: Decision,
}

impl Default for DecodingSection {
    fn default() -> Self {
        Self {
            unparseable_default: Decision::NoMatch,
        }
    }
}

/// A fully specified experiment run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset: DatasetSection,
    pub run: RunSection,
    pub variant: PromptVariant,
    pub backend: BackendSection,
    pub prompts: PromptSection,
    pub decoding: DecodingSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Checks that every referenced path exists and that the backend choice
    /// is usable before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dataset.path.as_os_str().is_empty() {
            return Err(ConfigError::Invalid("dataset.path is not set".to_string()));
        }
        if !self.dataset.path.is_dir() {
            return Err(ConfigError::Invalid(format!(
                "dataset directory {} does not exist",
                self.dataset.path.display()
            )));
        }
        if let Some(template_path) = &self.prompts.template_path {
            if !template_path.is_file() {
                return Err(ConfigError::Invalid(format!(
                    "template file {} does not exist",
                    template_path.display()
                )));
            }
        }
        match self.backend.kind {
            BackendKind::Fixture => match &self.backend.fixture_path {
                None => {
                    return Err(ConfigError::Invalid(
                        "backend.fixture_path is required for the fixture backend".to_string(),
                    ))
                }
                Some(path) if !path.is_file() => {
                    return Err(ConfigError::Invalid(format!(
                        "fixture file {} does not exist",
                        path.display()
                    )))
                }
                Some(_) => {}
            },
            BackendKind::Network => {
                if !self.backend.live {
                    return Err(ConfigError::Invalid(
                        "the network backend issues paid API calls; pass --live to confirm"
                            .to_string(),
                    ));
                }
                if std::env::var(&self.backend.api_key_env).is_err() {
                    return Err(ConfigError::Invalid(format!(
                        "environment variable {} is not set",
                        self.backend.api_key_env
                    )));
                }
            }
            BackendKind::Heuristic => {}
        }
        if self.backend.parallelism == 0 {
            return Err(ConfigError::Invalid(
                "backend.parallelism must be >= 1".to_string(),
            ));
        }
        if self.run.limit.is_some() && self.run.sample.is_some() {
            return Err(ConfigError::Invalid(
                "run.limit and run.sample are mutually exclusive".to_string(),
            ));
        }
        Ok(())
    }

    /// Dataset id: explicit override or the directory name.
    pub fn dataset_id(&self) -> String {
        self.dataset.id.clone().unwrap_or_else(|| {
            self.dataset
                .path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".to_string())
        })
    }

    /// Where the completion cache lives when caching is on.
    pub fn cache_dir(&self) -> PathBuf {
        self.backend
            .cache_dir
            .clone()
            .unwrap_or_else(|| self.run.output_dir.join("cache"))
    }

    /// The science-relevant configuration embedded into reports: everything
    /// that can change results, nothing that cannot.
    pub fn provenance(&self, template_version: &str, template_hash: &str) -> serde_json::Value {
        serde_json::json!({
            "dataset": {
                "id": self.dataset_id(),
                "format": self.dataset.format,
                "split": self.dataset.split,
                "limit": self.run.limit,
                "sample": self.run.sample,
            },
            "strategy": self.run.strategy,
            "variant": self.variant,
            "seed": self.run.seed,
            "backend": {
                "kind": self.backend.kind,
                "model": self.backend.model,
                "temperature": self.backend.temperature,
                "max_output_tokens": self.backend.max_output_tokens,
            },
            "prompts": {
                "style": self.prompts.style,
                "hint_min_phrase_tokens": self.prompts.hint_min_phrase_tokens,
                "template_version": template_version,
                "template_hash": template_hash,
            },
            "decoding": {
                "unparseable_default": self.decoding.unparseable_default,
            },
        })
    }
}
