//! Sweep part of the prompt design space and compare variants side by side.
//!
//! Varies the response frame and hint axes on the committed fixture with the
//! heuristic backend (four variants), leaving the other axes at their base
//! values, and prints the combined comparison.
//!
//! ```bash
//! cargo run -p stepmatch --example sweep_design_space
//! ```

use std::path::PathBuf;

use stepmatch::config::RunConfig;
use stepmatch::datasets::{DatasetFormat, Split};
use stepmatch::runner::{cmd_sweep, SweepAxis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let mut config = RunConfig::default();
    config.dataset.path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy10");
    config.dataset.format = DatasetFormat::Deepmatcher;
    config.dataset.split = Split::Test;
    config.dataset.domain = Some("product".to_string());
    config.run.output_dir = tmp.path().join("sweep");

    let outcome = cmd_sweep(&config, &[SweepAxis::ResponseFrame, SweepAxis::Hints], &[])?;
    print!("{}", outcome.table);
    println!(
        "\n{} runs; comparison at {}",
        outcome.runs.len(),
        outcome.comparison_csv.display()
    );
    for (variant, error) in &outcome.failed_variants {
        println!("failed {}: {error}", variant.slug());
    }
    Ok(())
}
