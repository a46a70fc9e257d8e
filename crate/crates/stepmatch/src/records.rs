//! Domain types for entity records, candidate pairs, and their deterministic
//! text rendering.
//!
//! A record is a bag of named string attributes under an [`AttributeSchema`].
//! Rendering is byte-deterministic so that prompts built from the same pair
//! are identical across runs, which is what makes response caching and replay
//! work.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by record construction and serialization.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordError {
    #[error("attribute name must be non-empty")]
    EmptyAttributeName,
    #[error("duplicate attribute name: {0}")]
    DuplicateAttribute(String),
    #[error("record {record_id} has attribute {attribute} not in schema {dataset_id}")]
    UnknownAttribute {
        record_id: String,
        attribute: String,
        dataset_id: String,
    },
}

/// The fixed, ordered list of attribute names shared by both sides of a
/// matching task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    dataset_id: String,
    attributes: Vec<String>,
}

impl AttributeSchema {
    /// Builds a schema, rejecting empty or duplicate attribute names.
    pub fn new(
        dataset_id: impl Into<String>,
        attributes: Vec<String>,
    ) -> Result<Self, RecordError> {
        let mut seen = std::collections::HashSet::new();
        for name in &attributes {
            if name.is_empty() {
                return Err(RecordError::EmptyAttributeName);
            }
            if !seen.insert(name.clone()) {
                return Err(RecordError::DuplicateAttribute(name.clone()));
            }
        }
        Ok(Self {
            dataset_id: dataset_id.into(),
            attributes,
        })
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    /// Attribute names in schema order.
    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.attributes.iter().any(|a| a == name)
    }
}

/// One entity record: an id plus attribute values. A `None` value means the
/// attribute is missing in the source data; absent keys are treated the same
/// way at serialization time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub record_id: String,
    values: BTreeMap<String, Option<String>>,
}

impl EntityRecord {
    pub fn new(record_id: impl Into<String>) -> Self {
        Self {
            record_id: record_id.into(),
            values: BTreeMap::new(),
        }
    }

    /// Sets an attribute value. `None` marks the value as missing.
    pub fn with_value(mut self, name: impl Into<String>, value: Option<&str>) -> Self {
        self.set_value(name, value.map(|v| v.to_string()));
        self
    }

    pub fn set_value(&mut self, name: impl Into<String>, value: Option<String>) {
        self.values.insert(name.into(), value);
    }

    pub fn value(&self, name: &str) -> Option<&str> {
        self.values.get(name).and_then(|v| v.as_deref())
    }

    /// Attribute names present in this record (alphabetical order).
    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|k| k.as_str())
    }

    /// `(name, value)` entries in alphabetical attribute order, with missing
    /// values as `None`.
    pub fn entries(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_deref()))
    }

    /// Checks that every attribute of this record is declared by `schema`.
    pub fn check_schema(&self, schema: &AttributeSchema) -> Result<(), RecordError> {
        for name in self.values.keys() {
            if !schema.contains(name) {
                return Err(RecordError::UnknownAttribute {
                    record_id: self.record_id.clone(),
                    attribute: name.clone(),
                    dataset_id: schema.dataset_id().to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Ground-truth match label. Stored as a raw integer so that loaders and
/// validators can represent out-of-range labels found in bad input instead of
/// panicking on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoldLabel(pub u8);

impl GoldLabel {
    pub const NO_MATCH: GoldLabel = GoldLabel(0);
    pub const MATCH: GoldLabel = GoldLabel(1);

    pub fn is_match(self) -> bool {
        self.0 == 1
    }

    pub fn is_valid(self) -> bool {
        self.0 <= 1
    }
}

impl fmt::Display for GoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A candidate pair of records, optionally carrying its gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordPair {
    pub pair_id: String,
    pub left: EntityRecord,
    pub right: EntityRecord,
    pub gold: Option<GoldLabel>,
}

impl RecordPair {
    pub fn new(
        pair_id: impl Into<String>,
        left: EntityRecord,
        right: EntityRecord,
        gold: Option<GoldLabel>,
    ) -> Self {
        Self {
            pair_id: pair_id.into(),
            left,
            right,
            gold,
        }
    }
}

/// How a record is rendered into prompt text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SerializationStyle {
    /// One `name: value` line per attribute, in schema order. Missing values
    /// render as an empty string after the colon.
    #[default]
    LabeledLines,
    /// `COL name VAL value ` units concatenated in schema order.
    ColVal,
}

/// Renders `record` as deterministic text: every schema attribute appears
/// exactly once, in schema order, with missing values as the style's empty
/// marker. Fails if the record carries an attribute outside the schema.
pub fn serialize_record(
    record: &EntityRecord,
    schema: &AttributeSchema,
    style: SerializationStyle,
) -> Result<String, RecordError> {
    record.check_schema(schema)?;
    let mut out = String::new();
    match style {
        SerializationStyle::LabeledLines => {
            for (i, name) in schema.attributes().iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(name);
                out.push_str(": ");
                out.push_str(record.value(name).unwrap_or(""));
            }
        }
        SerializationStyle::ColVal => {
            for name in schema.attributes() {
                out.push_str("COL ");
                out.push_str(name);
                out.push_str(" VAL ");
                out.push_str(record.value(name).unwrap_or(""));
                out.push(' ');
            }
        }
    }
    Ok(out)
}

/// A single validation problem found in a pair. Violations are data, not
/// errors: callers collect them and decide what to do.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// A record carries an attribute the schema does not declare.
    UnknownAttribute { side: PairSide, attribute: String },
    /// A record id is empty.
    MissingRecordId { side: PairSide },
    /// The pair id is empty.
    MissingPairId,
    /// The gold label is present but not 0 or 1.
    LabelOutOfRange { value: u8 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownAttribute { side, attribute } => {
                write!(f, "{side} record has unknown attribute {attribute:?}")
            }
            Violation::MissingRecordId { side } => write!(f, "{side} record id is empty"),
            Violation::MissingPairId => write!(f, "pair id is empty"),
            Violation::LabelOutOfRange { value } => {
                write!(f, "label {value} not in {{0,1}}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairSide {
    Left,
    Right,
}

impl fmt::Display for PairSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSide::Left => write!(f, "left"),
            PairSide::Right => write!(f, "right"),
        }
    }
}

/// Checks a pair against `schema` and returns every violation found. An empty
/// list means the pair is well formed.
pub fn validate_pair(pair: &RecordPair, schema: &AttributeSchema) -> Vec<Violation> {
    let mut violations = Vec::new();
    if pair.pair_id.is_empty() {
        violations.push(Violation::MissingPairId);
    }
    for (side, record) in [(PairSide::Left, &pair.left), (PairSide::Right, &pair.right)] {
        if record.record_id.is_empty() {
            violations.push(Violation::MissingRecordId { side });
        }
        for name in record.attribute_names() {
            if !schema.contains(name) {
                violations.push(Violation::UnknownAttribute {
                    side,
                    attribute: name.to_string(),
                });
            }
        }
    }
    if let Some(label) = pair.gold {
        if !label.is_valid() {
            violations.push(Violation::LabelOutOfRange { value: label.0 });
        }
    }
    violations
}
