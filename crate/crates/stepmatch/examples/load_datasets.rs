//! Load benchmark datasets and print their split statistics.
//!
//! Synthesizes two benchmark stand-ins (one per on-disk layout), writes them
//! to a temp directory, loads them back through the regular loaders, and
//! prints per-split and whole-dataset counts. Point `load_bundle` at a real
//! benchmark directory to get the same view of the published data.
//!
//! ```bash
//! cargo run -p stepmatch --example load_datasets
//! ```

use stepmatch::datasets::{benchmarks, load_bundle, Split};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;

    println!(
        "{:<6} {:<16} {:<12} {:>10} {:>10} {:>7}",
        "Id", "Name", "Domain", "Positive", "Negative", "Attrs"
    );
    for spec in &benchmarks::CATALOG {
        println!(
            "{:<6} {:<16} {:<12} {:>10} {:>10} {:>7}",
            spec.id,
            spec.name,
            spec.domain,
            spec.positives,
            spec.negatives,
            spec.attributes.len()
        );
    }

    for id in ["AB", "WDC"] {
        let spec = benchmarks::find(id).expect("catalog entry");
        let dir = spec.materialize(tmp.path())?;
        let bundle = load_bundle(&dir, spec.format)?;
        println!(
            "\n{} ({:?} layout) loaded from {}",
            spec.id,
            spec.format,
            dir.display()
        );
        for split in Split::ALL {
            let stats = bundle.split_stats(split)?;
            println!(
                "  {split:<5} {:>6} positive {:>6} negative",
                stats.n_positive, stats.n_negative
            );
        }
        let all = bundle.combined_stats();
        println!(
            "  total {:>6} positive {:>6} negative over {} attributes",
            all.n_positive, all.n_negative, all.n_attributes
        );

        let first = &bundle.split(Split::Test)?[0];
        println!(
            "  first test pair: {} (gold {})",
            first.pair_id,
            first.gold.unwrap()
        );
    }
    Ok(())
}
