//! Run a strategy against a real chat-completion endpoint.
//!
//! Guarded twice: it refuses to run without the API key env var, and the
//! `--live` equivalent flag in the config must be set. Prints the expected
//! request volume before issuing anything. Costs real tokens.
//!
//! ```bash
//! OPENAI_API_KEY=sk-... cargo run -p stepmatch --example live_api
//! ```

use std::path::PathBuf;

use stepmatch::config::{BackendKind, RunConfig};
use stepmatch::datasets::{DatasetFormat, Split};
use stepmatch::metrics::{emit_report, ReportFormat};
use stepmatch::runner::cmd_run;
use stepmatch::strategies::StrategyKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = RunConfig::default();
    config.dataset.path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy10");
    config.dataset.format = DatasetFormat::Deepmatcher;
    config.dataset.split = Split::Test;
    config.dataset.domain = Some("product".to_string());
    config.run.strategy = StrategyKind::Baseline;
    config.run.output_dir = std::env::temp_dir().join("stepmatch-live");
    config.backend.kind = BackendKind::Network;
    config.backend.live = true; // explicit opt-in, same as --live on the CLI
    config.backend.parallelism = 2;
    config.backend.rate_limit_requests = Some(30);

    if std::env::var(&config.backend.api_key_env).is_err() {
        eprintln!(
            "set {} to run this example; no requests were made",
            config.backend.api_key_env
        );
        return Ok(());
    }

    let n_prompts = 10 * config.run.strategy.step_sequence().len();
    println!(
        "about to issue ~{n_prompts} chat-completion requests to {} at {} (cached reruns are free)",
        config.backend.model, config.backend.base_url
    );

    let outcome = cmd_run(&config)?;
    print!(
        "{}",
        String::from_utf8(emit_report(&outcome.report, ReportFormat::Table)?)?
    );
    println!(
        "{} backend calls, {} errors; transcripts in {}",
        outcome.backend_calls,
        outcome.n_errors,
        outcome.output_dir.display()
    );
    Ok(())
}
