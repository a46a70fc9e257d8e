//! Catalog of the six public matching benchmarks the harness targets, plus a
//! deterministic synthesizer that materializes layout-faithful stand-ins with
//! the same published split statistics.
//!
//! The synthesizer exists so every pipeline stage can be exercised offline at
//! benchmark scale: generated directories have the exact directory layout,
//! schema width, and positive/negative counts of the real distributions. To
//! run against the actual benchmark data, point the loader at a directory
//! containing the original files instead.

use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{write_bundle, DatasetBundle, DatasetError, DatasetFormat, Split, SplitStats};
use crate::records::{AttributeSchema, EntityRecord, GoldLabel, RecordPair};

/// One benchmark task: its published statistics and on-disk layout.
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkSpec {
    pub id: &'static str,
    pub name: &'static str,
    pub domain: &'static str,
    pub positives: usize,
    pub negatives: usize,
    pub attributes: &'static [&'static str],
    pub format: DatasetFormat,
    seed: u64,
}

/// The six benchmark tasks, with whole-dataset positive/negative counts and
/// attribute widths.
pub const CATALOG: [BenchmarkSpec; 6] = [
    BenchmarkSpec {
        id: "AB",
        name: "Abt-Buy",
        domain: "product",
        positives: 1_028,
        negatives: 8_547,
        attributes: &["name", "description", "price"],
        format: DatasetFormat::Deepmatcher,
        seed: 0xAB,
    },
    BenchmarkSpec {
        id: "DA",
        name: "DBLP-ACM",
        domain: "citation",
        positives: 2_220,
        negatives: 10_143,
        attributes: &["title", "authors", "venue", "year"],
        format: DatasetFormat::Deepmatcher,
        seed: 0xDA,
    },
    BenchmarkSpec {
        id: "DS",
        name: "DBLP-Scholar",
        domain: "citation",
        positives: 5_347,
        negatives: 23_360,
        attributes: &["title", "authors", "venue", "year"],
        format: DatasetFormat::Deepmatcher,
        seed: 0xD5,
    },
    BenchmarkSpec {
        id: "WA",
        name: "Walmart-Amazon",
        domain: "electronics",
        positives: 962,
        negatives: 9_280,
        attributes: &["title", "category", "brand", "modelno", "price"],
        format: DatasetFormat::Deepmatcher,
        seed: 0x3A,
    },
    BenchmarkSpec {
        id: "AG",
        name: "Amazon-Google",
        domain: "software",
        positives: 1_167,
        negatives: 10_293,
        attributes: &["title", "manufacturer", "price"],
        format: DatasetFormat::Deepmatcher,
        seed: 0xA6,
    },
    BenchmarkSpec {
        id: "WDC",
        name: "WDC Products",
        domain: "product",
        positives: 2_250,
        negatives: 7_992,
        attributes: &["title", "description", "price"],
        format: DatasetFormat::WdcPairs,
        seed: 0x3DC,
    },
];

/// Looks a benchmark up by id or name, case-insensitively.
pub fn find(id: &str) -> Option<&'static BenchmarkSpec> {
    CATALOG
        .iter()
        .find(|b| b.id.eq_ignore_ascii_case(id) || b.name.eq_ignore_ascii_case(id))
}

/// Task-frame domain word for a dataset id, when it names a known benchmark.
pub fn domain_of(dataset_id: &str) -> Option<&'static str> {
    find(dataset_id).map(|b| b.domain)
}

/// 3:1:1 train/valid/test split of a whole-dataset count.
fn distribute(total: usize) -> [usize; 3] {
    let train = total * 3 / 5;
    let valid = total / 5;
    [train, valid, total - train - valid]
}

const WORDS: [&str; 48] = [
    "alpha", "nova", "prime", "ultra", "max", "mini", "pro", "air", "core", "edge", "flex", "wave",
    "solo", "duo", "zoom", "lite", "neo", "apex", "vivid", "quartz", "argon", "cobalt", "delta",
    "ember", "falcon", "garnet", "helix", "ion", "jade", "krypton", "lumen", "mica", "nimbus",
    "onyx", "pixel", "quill", "raven", "sable", "topaz", "umber", "vertex", "willow", "xenon",
    "yarrow", "zephyr", "orbit", "strata", "fable",
];

fn words(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn attribute_value(rng: &mut ChaCha8Rng, attr: &str) -> Option<String> {
    if rng.gen_bool(0.04) {
        return None; // occasional missing cell, as in the real tables
    }
    let value = match attr {
        "price" => format!("{}.{:02}", rng.gen_range(5..2000), rng.gen_range(0..100)),
        "year" => rng.gen_range(1995..2024).to_string(),
        "description" => {
            let n = rng.gen_range(6..14);
            words(rng, n)
        }
        "category" | "brand" | "manufacturer" => words(rng, 1),
        "modelno" => format!("{}{}", words(rng, 1), rng.gen_range(100..9999)),
        _ => {
            let n = rng.gen_range(3..7);
            words(rng, n)
        }
    };
    Some(value)
}

fn fresh_record(rng: &mut ChaCha8Rng, id: String, attributes: &[&str]) -> EntityRecord {
    let mut record = EntityRecord::new(id);
    for attr in attributes {
        record.set_value(attr.to_string(), attribute_value(rng, attr));
    }
    record
}

/// A near-duplicate of `base`: most values copied, some lightly edited.
fn perturbed_record(rng: &mut ChaCha8Rng, id: String, base: &EntityRecord) -> EntityRecord {
    let mut record = EntityRecord::new(id);
    for (attr, value) in base.entries() {
        let value = match value {
            None => None,
            Some(v) => {
                if rng.gen_bool(0.3) {
                    let mut tokens: Vec<&str> = v.split_whitespace().collect();
                    if tokens.len() > 1 {
                        tokens.pop();
                    }
                    Some(tokens.join(" "))
                } else {
                    Some(v.to_string())
                }
            }
        };
        record.set_value(attr.to_string(), value);
    }
    record
}

impl BenchmarkSpec {
    /// Published whole-dataset statistics.
    pub fn stats(&self) -> SplitStats {
        SplitStats {
            n_positive: self.positives,
            n_negative: self.negatives,
            n_attributes: self.attributes.len(),
        }
    }

    /// Builds the stand-in bundle in memory. Deterministic for a given spec.
    pub fn synthesize(&self) -> DatasetBundle {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let schema = AttributeSchema::new(
            self.id,
            self.attributes.iter().map(|a| a.to_string()).collect(),
        )
        .expect("catalog attribute names are valid");

        let pos_by_split = distribute(self.positives);
        let neg_by_split = distribute(self.negatives);
        let mut table_a = std::collections::BTreeMap::new();
        let mut table_b = std::collections::BTreeMap::new();
        let mut splits = std::collections::BTreeMap::new();
        let mut counter = 0usize;

        for (si, split) in Split::ALL.into_iter().enumerate() {
            let mut pairs = Vec::new();
            for (n_pairs, positive) in [(pos_by_split[si], true), (neg_by_split[si], false)] {
                for _ in 0..n_pairs {
                    let (lid, rid) = match self.format {
                        DatasetFormat::Deepmatcher => {
                            (format!("a{counter}"), format!("b{counter}"))
                        }
                        DatasetFormat::WdcPairs => {
                            let row = pairs.len();
                            (format!("{split}-{row}-l"), format!("{split}-{row}-r"))
                        }
                    };
                    counter += 1;
                    let left = fresh_record(&mut rng, lid.clone(), self.attributes);
                    let right = if positive {
                        perturbed_record(&mut rng, rid.clone(), &left)
                    } else {
                        fresh_record(&mut rng, rid.clone(), self.attributes)
                    };
                    let pair_id = match self.format {
                        DatasetFormat::Deepmatcher => format!("{split}:{lid}|{rid}"),
                        DatasetFormat::WdcPairs => format!("{split}:{}", pairs.len()),
                    };
                    let label = if positive {
                        GoldLabel::MATCH
                    } else {
                        GoldLabel::NO_MATCH
                    };
                    table_a.insert(lid, left.clone());
                    table_b.insert(rid, right.clone());
                    pairs.push(RecordPair::new(pair_id, left, right, Some(label)));
                }
            }
            splits.insert(split, pairs);
        }
        DatasetBundle {
            schema,
            table_a,
            table_b,
            splits,
        }
    }

    /// Synthesizes and writes the benchmark under `base_dir/<id>` in its
    /// native layout, returning the dataset directory.
    pub fn materialize(&self, base_dir: &Path) -> Result<PathBuf, DatasetError> {
        let dir = base_dir.join(self.id);
        let bundle = self.synthesize();
        write_bundle(&bundle, &dir, self.format)?;
        Ok(dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::load_bundle;

    #[test]
    fn split_distribution_sums() {
        for total in [0, 1, 4, 5, 9575, 28_707] {
            let parts = distribute(total);
            assert_eq!(parts.iter().sum::<usize>(), total);
        }
    }

    #[test]
    fn synthesized_bundle_has_catalog_stats() {
        let spec = find("AB").unwrap();
        let bundle = spec.synthesize();
        let stats = bundle.combined_stats();
        assert_eq!(stats.n_positive, 1_028);
        assert_eq!(stats.n_negative, 8_547);
        assert_eq!(stats.n_attributes, 3);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let spec = find("WA").unwrap();
        assert_eq!(spec.synthesize(), spec.synthesize());
    }

    #[test]
    fn materialized_benchmark_reloads_identically() {
        let tmp = tempfile::tempdir().unwrap();
        let spec = find("WDC").unwrap();
        let dir = spec.materialize(tmp.path()).unwrap();
        let loaded = load_bundle(&dir, spec.format).unwrap();
        assert_eq!(loaded, spec.synthesize());
    }

    #[test]
    fn domain_lookup() {
        assert_eq!(domain_of("DA"), Some("citation"));
        assert_eq!(domain_of("walmart-amazon"), Some("electronics"));
        assert_eq!(domain_of("nope"), None);
    }
}
