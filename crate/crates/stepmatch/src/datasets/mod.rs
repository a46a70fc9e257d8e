//! Benchmark dataset ingestion: two-table layouts with labeled pair files,
//! and self-contained pair-per-row layouts.
//!
//! Loading is strict: dangling pair references, malformed rows, and labels
//! outside {0,1} are reported with file and row context instead of being
//! silently skipped. Loaded bundles are immutable and cheap to share.

pub mod benchmarks;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{AttributeSchema, EntityRecord, GoldLabel, RecordError, RecordPair};

/// Dataset split names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split: {other}")),
        }
    }
}

/// On-disk layout of a dataset directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    /// `tableA.csv` / `tableB.csv` (first column `id`) plus
    /// `train.csv`/`valid.csv`/`test.csv` with `ltable_id,rtable_id,label`.
    Deepmatcher,
    /// One CSV or JSONL file per split; each row carries `left_`-prefixed
    /// attributes, `right_`-prefixed attributes, and `label`.
    WdcPairs,
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deepmatcher" => Ok(DatasetFormat::Deepmatcher),
            "wdc-pairs" | "wdc_pairs" | "wdc" => Ok(DatasetFormat::WdcPairs),
            other => Err(format!("unknown dataset format: {other}")),
        }
    }
}

/// Errors raised while loading or writing dataset bundles.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{row}: pair references unknown {table} record id {record_id:?}")]
    DanglingReference {
        file: String,
        row: usize,
        table: String,
        record_id: String,
    },
    #[error("{file}:{row}: malformed row: {reason}")]
    MalformedRow {
        file: String,
        row: usize,
        reason: String,
    },
    #[error("{file}:{row}: label {value:?} is not 0 or 1")]
    BadLabel {
        file: String,
        row: usize,
        value: String,
    },
    #[error("split {0} not present in bundle")]
    UnknownSplit(Split),
    #[error(
        "train split has {have_pos} positives / {have_neg} negatives, \
         need {need_pos} / {need_neg} for k={k}"
    )]
    InsufficientExamples {
        k: usize,
        need_pos: usize,
        need_neg: usize,
        have_pos: usize,
        have_neg: usize,
    },
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A fully resolved dataset: schema, both record tables, and labeled pair
/// splits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub schema: AttributeSchema,
    pub table_a: BTreeMap<String, EntityRecord>,
    pub table_b: BTreeMap<String, EntityRecord>,
    pub splits: BTreeMap<Split, Vec<RecordPair>>,
}

/// Counts for one split (or a union of splits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_attributes: usize,
}

impl SplitStats {
    /// Single pass over `pairs`.
    pub fn from_pairs(pairs: &[RecordPair], n_attributes: usize) -> Self {
        let mut n_positive = 0;
        let mut n_negative = 0;
        for pair in pairs {
            match pair.gold {
                Some(label) if label.is_match() => n_positive += 1,
                Some(_) => n_negative += 1,
                None => {}
            }
        }
        Self {
            n_positive,
            n_negative,
            n_attributes,
        }
    }

    pub fn total(&self) -> usize {
        self.n_positive + self.n_negative
    }
}

/// A labeled exemplar pair shown to the model in few-shot prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub pair: RecordPair,
    pub answer: GoldLabel,
}

impl DatasetBundle {
    pub fn split(&self, split: Split) -> Result<&[RecordPair], DatasetError> {
        self.splits
            .get(&split)
            .map(|v| v.as_slice())
            .ok_or(DatasetError::UnknownSplit(split))
    }

    /// Stats for one split.
    pub fn split_stats(&self, split: Split) -> Result<SplitStats, DatasetError> {
        Ok(SplitStats::from_pairs(
            self.split(split)?,
            self.schema.len(),
        ))
    }

    /// Stats over every split combined.
    pub fn combined_stats(&self) -> SplitStats {
        let mut n_positive = 0;
        let mut n_negative = 0;
        for pairs in self.splits.values() {
            let s = SplitStats::from_pairs(pairs, self.schema.len());
            n_positive += s.n_positive;
            n_negative += s.n_negative;
        }
        SplitStats {
            n_positive,
            n_negative,
            n_attributes: self.schema.len(),
        }
    }
}

/// Loads a dataset directory in the given layout.
pub fn load_bundle(dir: &Path, format: DatasetFormat) -> Result<DatasetBundle, DatasetError> {
    match format {
        DatasetFormat::Deepmatcher => load_deepmatcher(dir),
        DatasetFormat::WdcPairs => load_wdc_pairs(dir),
    }
}

/// Writes a bundle back to disk in the given layout. Splits keep their pair
/// order, tables are written in record-id order, and values round-trip.
pub fn write_bundle(
    bundle: &DatasetBundle,
    dir: &Path,
    format: DatasetFormat,
) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    match format {
        DatasetFormat::Deepmatcher => write_deepmatcher(bundle, dir),
        DatasetFormat::WdcPairs => write_wdc_pairs(bundle, dir),
    }
}

/// Draws `k` exemplars from the train split: `ceil(k/2)` positives followed
/// by `floor(k/2)` negatives, deterministic under `(bundle, k, seed)`.
pub fn sample_few_shot(
    bundle: &DatasetBundle,
    k: usize,
    seed: u64,
) -> Result<Vec<FewShotExample>, DatasetError> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let train = bundle.split(Split::Train)?;
    let positives: Vec<&RecordPair> = train
        .iter()
        .filter(|p| p.gold.map(|g| g.is_match()).unwrap_or(false))
        .collect();
    let negatives: Vec<&RecordPair> = train
        .iter()
        .filter(|p| p.gold.map(|g| !g.is_match()).unwrap_or(false))
        .collect();
    let need_pos = k.div_ceil(2);
    let need_neg = k / 2;
    if positives.len() < need_pos || negatives.len() < need_neg {
        return Err(DatasetError::InsufficientExamples {
            k,
            need_pos,
            need_neg,
            have_pos: positives.len(),
            have_neg: negatives.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |pool: &[&RecordPair], n: usize| -> Vec<FewShotExample> {
        let mut picked = rand::seq::index::sample(&mut rng, pool.len(), n).into_vec();
        picked.sort_unstable();
        picked
            .into_iter()
            .map(|i| FewShotExample {
                pair: pool[i].clone(),
                answer: pool[i].gold.expect("filtered on gold"),
            })
            .collect()
    };
    let mut examples = draw(&positives, need_pos);
    examples.extend(draw(&negatives, need_neg));
    Ok(examples)
}

// ---------------------------------------------------------------------------
// deepmatcher layout
// ---------------------------------------------------------------------------

fn dataset_id_from_dir(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>, DatasetError> {
    if !path.is_file() {
        return Err(DatasetError::MissingFile(path.to_path_buf()));
    }
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| DatasetError::MalformedRow {
            file: file_name(path),
            row: 0,
            reason: e.to_string(),
        })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn clean_value(raw: &str) -> Option<String> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_string())
    }
}

fn parse_label(raw: &str, file: &str, row: usize) -> Result<GoldLabel, DatasetError> {
    match raw.trim() {
        "0" => Ok(GoldLabel::NO_MATCH),
        "1" => Ok(GoldLabel::MATCH),
        other => Err(DatasetError::BadLabel {
            file: file.to_string(),
            row,
            value: other.to_string(),
        }),
    }
}

fn read_table(
    path: &Path,
    expected_schema: Option<&[String]>,
) -> Result<(Vec<String>, BTreeMap<String, EntityRecord>), DatasetError> {
    let file = file_name(path);
    let mut reader = open_csv(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DatasetError::MalformedRow {
            file: file.clone(),
            row: 0,
            reason: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.first().map(|h| h.as_str()) != Some("id") {
        return Err(DatasetError::MalformedRow {
            file,
            row: 0,
            reason: "first column must be `id`".to_string(),
        });
    }
    let attributes: Vec<String> = headers[1..].to_vec();
    if let Some(expected) = expected_schema {
        if attributes != expected {
            return Err(DatasetError::MalformedRow {
                file,
                row: 0,
                reason: format!("attribute columns {attributes:?} do not match {expected:?}"),
            });
        }
    }
    let mut table = BTreeMap::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header line
        let record = result.map_err(|e| DatasetError::MalformedRow {
            file: file.clone(),
            row,
            reason: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(DatasetError::MalformedRow {
                file,
                row,
                reason: format!("expected {} columns, found {}", headers.len(), record.len()),
            });
        }
        let id = record[0].trim().to_string();
        if id.is_empty() {
            return Err(DatasetError::MalformedRow {
                file,
                row,
                reason: "empty record id".to_string(),
            });
        }
        let mut entity = EntityRecord::new(&id);
        for (attr, raw) in attributes.iter().zip(record.iter().skip(1)) {
            entity.set_value(attr.clone(), clean_value(raw));
        }
        table.insert(id, entity);
    }
    Ok((attributes, table))
}

/// Builds a split-scoped pair id; repeated `(left, right)` rows get a
/// `#<n>` suffix so ids stay unique within the split.
fn make_pair_id(split: Split, lid: &str, rid: &str, seen: &mut BTreeMap<String, usize>) -> String {
    let base = format!("{split}:{lid}|{rid}");
    let n = seen.entry(base.clone()).or_insert(0);
    *n += 1;
    if *n == 1 {
        base
    } else {
        format!("{base}#{n}")
    }
}

fn load_deepmatcher(dir: &Path) -> Result<DatasetBundle, DatasetError> {
    let (attributes, table_a) = read_table(&dir.join("tableA.csv"), None)?;
    let (_, table_b) = read_table(&dir.join("tableB.csv"), Some(&attributes))?;
    let schema = AttributeSchema::new(dataset_id_from_dir(dir), attributes)?;

    let mut splits = BTreeMap::new();
    for split in Split::ALL {
        let path = dir.join(format!("{split}.csv"));
        let file = file_name(&path);
        let mut reader = open_csv(&path)?;
        let headers = reader
            .headers()
            .map_err(|e| DatasetError::MalformedRow {
                file: file.clone(),
                row: 0,
                reason: e.to_string(),
            })?
            .clone();
        let expected = ["ltable_id", "rtable_id", "label"];
        if headers.iter().map(str::trim).collect::<Vec<_>>() != expected {
            return Err(DatasetError::MalformedRow {
                file,
                row: 0,
                reason: format!("expected columns {expected:?}"),
            });
        }
        let mut pairs = Vec::new();
        let mut seen = BTreeMap::new();
        for (i, result) in reader.records().enumerate() {
            let row = i + 2;
            let record = result.map_err(|e| DatasetError::MalformedRow {
                file: file.clone(),
                row,
                reason: e.to_string(),
            })?;
            if record.len() != 3 {
                return Err(DatasetError::MalformedRow {
                    file,
                    row,
                    reason: format!("expected 3 columns, found {}", record.len()),
                });
            }
            let lid = record[0].trim();
            let rid = record[1].trim();
            let left = table_a
                .get(lid)
                .ok_or_else(|| DatasetError::DanglingReference {
                    file: file.clone(),
                    row,
                    table: "tableA".to_string(),
                    record_id: lid.to_string(),
                })?;
            let right = table_b
                .get(rid)
                .ok_or_else(|| DatasetError::DanglingReference {
                    file: file.clone(),
                    row,
                    table: "tableB".to_string(),
                    record_id: rid.to_string(),
                })?;
            let label = parse_label(&record[2], &file, row)?;
            pairs.push(RecordPair::new(
                make_pair_id(split, lid, rid, &mut seen),
                left.clone(),
                right.clone(),
                Some(label),
            ));
        }
        splits.insert(split, pairs);
    }
    Ok(DatasetBundle {
        schema,
        table_a,
        table_b,
        splits,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, DatasetError> {
    csv::WriterBuilder::new()
        .from_path(path)
        .map_err(|e| DatasetError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        })
}

fn write_table(
    path: &Path,
    schema: &AttributeSchema,
    table: &BTreeMap<String, EntityRecord>,
) -> Result<(), DatasetError> {
    let mut writer = csv_writer(path)?;
    let io_err = |e: csv::Error| DatasetError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let mut header = vec!["id".to_string()];
    header.extend(schema.attributes().iter().cloned());
    writer.write_record(&header).map_err(io_err)?;
    for (id, record) in table {
        let mut row = vec![id.clone()];
        for attr in schema.attributes() {
            row.push(record.value(attr).unwrap_or("").to_string());
        }
        writer.write_record(&row).map_err(io_err)?;
    }
    writer.flush().map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn split_record_ids(pair_id: &str) -> Option<(String, String)> {
    let after_split = pair_id.split_once(':')?.1;
    let without_dup = after_split.split_once('#').map_or(after_split, |(s, _)| s);
    let (lid, rid) = without_dup.split_once('|')?;
    Some((lid.to_string(), rid.to_string()))
}

fn write_deepmatcher(bundle: &DatasetBundle, dir: &Path) -> Result<(), DatasetError> {
    write_table(&dir.join("tableA.csv"), &bundle.schema, &bundle.table_a)?;
    write_table(&dir.join("tableB.csv"), &bundle.schema, &bundle.table_b)?;
    for split in Split::ALL {
        let path = dir.join(format!("{split}.csv"));
        let io_err = |e: csv::Error| DatasetError::Io {
            path: path.clone(),
            source: std::io::Error::other(e),
        };
        let mut writer = csv_writer(&path)?;
        writer
            .write_record(["ltable_id", "rtable_id", "label"])
            .map_err(io_err)?;
        for pair in bundle.splits.get(&split).map(Vec::as_slice).unwrap_or(&[]) {
            let (lid, rid) = split_record_ids(&pair.pair_id)
                .unwrap_or_else(|| (pair.left.record_id.clone(), pair.right.record_id.clone()));
            let label = pair.gold.map(|g| g.to_string()).unwrap_or_default();
            writer.write_record([lid, rid, label]).map_err(io_err)?;
        }
        writer.flush().map_err(|source| DatasetError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// wdc-pairs layout
// ---------------------------------------------------------------------------

/// Column-oriented view of one wdc split file: named columns plus row cells
/// in column order.
struct WdcRows {
    columns: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
    file: String,
}

impl WdcRows {
    fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Attribute names, in column order, derived from the `left_` prefix.
    fn attributes(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter_map(|c| c.strip_prefix("left_"))
            .map(|a| a.to_string())
            .collect()
    }
}

fn load_wdc_pairs(dir: &Path) -> Result<DatasetBundle, DatasetError> {
    let dataset_id = dataset_id_from_dir(dir);
    let mut schema: Option<AttributeSchema> = None;
    let mut table_a = BTreeMap::new();
    let mut table_b = BTreeMap::new();
    let mut splits = BTreeMap::new();

    for split in Split::ALL {
        let csv_path = dir.join(format!("{split}.csv"));
        let jsonl_path = dir.join(format!("{split}.jsonl"));
        let data = if csv_path.is_file() {
            read_wdc_csv(&csv_path)?
        } else if jsonl_path.is_file() {
            read_wdc_jsonl(&jsonl_path)?
        } else {
            return Err(DatasetError::MissingFile(csv_path));
        };

        let attrs = data.attributes();
        let schema = match &schema {
            Some(existing) => {
                if existing.attributes() != attrs.as_slice() {
                    return Err(DatasetError::MalformedRow {
                        file: data.file.clone(),
                        row: 0,
                        reason: format!(
                            "attributes {attrs:?} do not match {:?}",
                            existing.attributes()
                        ),
                    });
                }
                existing.clone()
            }
            None => {
                let s = AttributeSchema::new(dataset_id.clone(), attrs.clone())?;
                schema = Some(s.clone());
                s
            }
        };
        let label_col = data
            .column("label")
            .ok_or_else(|| DatasetError::MalformedRow {
                file: data.file.clone(),
                row: 0,
                reason: "missing label column".to_string(),
            })?;
        let mut side_cols = Vec::new();
        for attr in schema.attributes() {
            let left = data.column(&format!("left_{attr}")).expect("derived");
            let right = data.column(&format!("right_{attr}")).ok_or_else(|| {
                DatasetError::MalformedRow {
                    file: data.file.clone(),
                    row: 0,
                    reason: format!("missing right_{attr} column"),
                }
            })?;
            side_cols.push((attr.clone(), left, right));
        }

        let mut pairs = Vec::new();
        for (i, row) in data.rows.iter().enumerate() {
            let row_no = i + 2;
            let label_raw = row[label_col]
                .clone()
                .ok_or_else(|| DatasetError::MalformedRow {
                    file: data.file.clone(),
                    row: row_no,
                    reason: "missing label".to_string(),
                })?;
            let label = parse_label(&label_raw, &data.file, row_no)?;
            let left_id = format!("{split}-{i}-l");
            let right_id = format!("{split}-{i}-r");
            let mut left = EntityRecord::new(&left_id);
            let mut right = EntityRecord::new(&right_id);
            for (attr, lcol, rcol) in &side_cols {
                left.set_value(attr.clone(), row[*lcol].clone());
                right.set_value(attr.clone(), row[*rcol].clone());
            }
            table_a.insert(left_id, left.clone());
            table_b.insert(right_id, right.clone());
            pairs.push(RecordPair::new(
                format!("{split}:{i}"),
                left,
                right,
                Some(label),
            ));
        }
        splits.insert(split, pairs);
    }

    let schema = match schema {
        Some(s) => s,
        None => AttributeSchema::new(dataset_id, vec!["title".to_string()])?,
    };
    Ok(DatasetBundle {
        schema,
        table_a,
        table_b,
        splits,
    })
}

fn read_wdc_csv(path: &Path) -> Result<WdcRows, DatasetError> {
    let file = file_name(path);
    let mut reader = open_csv(path)?;
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| DatasetError::MalformedRow {
            file: file.clone(),
            row: 0,
            reason: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let row_no = i + 2;
        let record = result.map_err(|e| DatasetError::MalformedRow {
            file: file.clone(),
            row: row_no,
            reason: e.to_string(),
        })?;
        if record.len() != columns.len() {
            return Err(DatasetError::MalformedRow {
                file,
                row: row_no,
                reason: format!("expected {} columns, found {}", columns.len(), record.len()),
            });
        }
        rows.push(record.iter().map(clean_value).collect());
    }
    Ok(WdcRows {
        columns,
        rows,
        file,
    })
}

fn read_wdc_jsonl(path: &Path) -> Result<WdcRows, DatasetError> {
    let file = file_name(path);
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    // JSON objects carry no reliable key order; columns are the sorted union
    // of keys across rows.
    let mut parsed: Vec<BTreeMap<String, Option<String>>> = Vec::new();
    let mut columns: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Map<String, serde_json::Value> = serde_json::from_str(line)
            .map_err(|e| DatasetError::MalformedRow {
                file: file.clone(),
                row: row_no,
                reason: e.to_string(),
            })?;
        let mut map = BTreeMap::new();
        for (k, v) in value {
            let cell = match v {
                serde_json::Value::Null => None,
                serde_json::Value::String(s) => clean_value(&s),
                other => clean_value(&other.to_string()),
            };
            if !columns.contains(&k) {
                columns.push(k.clone());
            }
            map.insert(k, cell);
        }
        parsed.push(map);
    }
    columns.sort();
    let rows = parsed
        .into_iter()
        .map(|map| {
            columns
                .iter()
                .map(|c| map.get(c).cloned().flatten())
                .collect()
        })
        .collect();
    Ok(WdcRows {
        columns,
        rows,
        file,
    })
}

fn write_wdc_pairs(bundle: &DatasetBundle, dir: &Path) -> Result<(), DatasetError> {
    for split in Split::ALL {
        let path = dir.join(format!("{split}.csv"));
        let io_err = |e: csv::Error| DatasetError::Io {
            path: path.clone(),
            source: std::io::Error::other(e),
        };
        let mut writer = csv_writer(&path)?;
        let mut header = Vec::new();
        for attr in bundle.schema.attributes() {
            header.push(format!("left_{attr}"));
        }
        for attr in bundle.schema.attributes() {
            header.push(format!("right_{attr}"));
        }
        header.push("label".to_string());
        writer.write_record(&header).map_err(io_err)?;
        for pair in bundle.splits.get(&split).map(Vec::as_slice).unwrap_or(&[]) {
            let mut row = Vec::new();
            for attr in bundle.schema.attributes() {
                row.push(pair.left.value(attr).unwrap_or("").to_string());
            }
            for attr in bundle.schema.attributes() {
                row.push(pair.right.value(attr).unwrap_or("").to_string());
            }
            row.push(pair.gold.map(|g| g.to_string()).unwrap_or_default());
            writer.write_record(&row).map_err(io_err)?;
        }
        writer.flush().map_err(|source| DatasetError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}
