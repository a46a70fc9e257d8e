//! Full offline evaluation on the committed 10-pair fixture.
//!
//! Scripts a fixture backend (request hash -> canned response) with known
//! decisions, runs the whole pipeline through `cmd_run`, and prints the
//! report: the scripted 2 TP / 1 FP / 1 FN / 6 TN yields precision = recall
//! = F1 = 2/3 exactly. The same mechanism replays recorded responses from
//! any earlier run.
//!
//! ```bash
//! cargo run -p stepmatch --example evaluate_fixture
//! ```

use std::path::PathBuf;

use stepmatch::config::{BackendKind, RunConfig};
use stepmatch::datasets::{load_bundle, sample_few_shot, DatasetFormat, Split};
use stepmatch::gateway::FixtureBackend;
use stepmatch::metrics::{emit_report, ReportFormat};
use stepmatch::prompts::{PromptRenderer, RenderOptions, TemplateSet};
use stepmatch::runner::cmd_run;
use stepmatch::strategies::script_strategy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let mut config = RunConfig::default();
    config.dataset.path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy10");
    config.dataset.format = DatasetFormat::Deepmatcher;
    config.dataset.split = Split::Test;
    config.dataset.domain = Some("product".to_string());
    config.run.output_dir = tmp.path().join("run");

    // Script one response per pair: which pairs the "model" calls a match.
    let bundle = load_bundle(&config.dataset.path, config.dataset.format)?;
    let renderer = PromptRenderer::new(
        TemplateSet::builtin(),
        bundle.schema.clone(),
        "product",
        RenderOptions::default(),
    );
    let shots = sample_few_shot(&bundle, config.variant.shots, config.run.seed)?;
    let say_yes = ["test:a0|b0", "test:a1|b1", "test:a3|b3"];
    let mut responses = std::collections::HashMap::new();
    for pair in bundle.split(config.dataset.split)? {
        let entries = script_strategy(
            &renderer,
            &config.backend.completion_params(),
            config.run.strategy,
            pair,
            &config.variant,
            &shots,
            &mut |_, p| {
                if say_yes.contains(&p.pair_id.as_str()) {
                    "These listings align on every field.\nMatch: Yes".to_string()
                } else {
                    "The models and prices disagree.\nMatch: No".to_string()
                }
            },
        )?;
        responses.extend(entries);
    }
    let fixture_path = tmp.path().join("responses.json");
    FixtureBackend::write_file(&responses, &fixture_path)?;
    config.backend.kind = BackendKind::Fixture;
    config.backend.fixture_path = Some(fixture_path);

    let outcome = cmd_run(&config)?;
    print!(
        "{}",
        String::from_utf8(emit_report(&outcome.report, ReportFormat::Table)?)?
    );
    println!(
        "counts: tp={} fp={} fn={} tn={}  precision={:.4} recall={:.4}",
        outcome.report.counts.true_pos,
        outcome.report.counts.false_pos,
        outcome.report.counts.false_neg,
        outcome.report.counts.true_neg,
        outcome.report.precision,
        outcome.report.recall
    );
    println!("artifacts in {}", outcome.output_dir.display());
    Ok(())
}
