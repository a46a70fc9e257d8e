//! Compare token costs across strategies.
//!
//! Runs every strategy over the committed fixture with the heuristic backend
//! and its exact mock token rule, then prints totals and per-pair means. The
//! chained strategies re-send the records and earlier responses each turn,
//! so their per-pair cost is a multiple of the single-prompt baseline.
//!
//! ```bash
//! cargo run -p stepmatch --example token_costs
//! ```

use std::path::PathBuf;

use stepmatch::config::RunConfig;
use stepmatch::datasets::{DatasetFormat, Split};
use stepmatch::runner::cmd_run;
use stepmatch::strategies::StrategyKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    println!(
        "{:<12} {:>8} {:>9} {:>10} {:>12}",
        "Method", "F1", "Input", "Output", "Mean / pair"
    );
    for kind in StrategyKind::ALL {
        let mut config = RunConfig::default();
        config.dataset.path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy10");
        config.dataset.format = DatasetFormat::Deepmatcher;
        config.dataset.split = Split::Test;
        config.dataset.domain = Some("product".to_string());
        config.run.strategy = kind;
        config.run.output_dir = tmp.path().join(kind.to_string());

        let outcome = cmd_run(&config)?;
        let report = &outcome.report;
        println!(
            "{:<12} {:>8.3} {:>9} {:>10} {:>12.1}",
            kind.to_string(),
            report.f1,
            report.token_total.input_tokens,
            report.token_total.output_tokens,
            report.token_mean_per_pair
        );
    }
    Ok(())
}
