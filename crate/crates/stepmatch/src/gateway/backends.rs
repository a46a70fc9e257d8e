//! Deterministic offline backends.
//!
//! [`HeuristicBackend`] simulates each reasoning step from the actual prompt
//! content: it re-extracts the two record blocks the renderer embedded,
//! recomputes the token diff locally, and answers with a fixed similarity
//! rule. [`FixtureBackend`] replays canned responses keyed by request hash.
//! Both report usage with the mock token rule so tests can check accounting
//! exactly.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::lexical;
use crate::prompts::{Scaffold, StepId, TemplateSet};
use crate::records::EntityRecord;

use super::{cache_key, Backend, BackendResponse, CompletionRequest, GatewayError, Usage};

/// Attribute/value pairs of one record block, in block order.
pub type RecordAttrs = Vec<(String, String)>;

/// The published mock token rule: whitespace token counts of all message
/// contents (input) and of the response text (output).
pub fn mock_usage(request: &CompletionRequest, response_text: &str) -> Usage {
    Usage {
        input_tokens: request.messages.whitespace_tokens(),
        output_tokens: response_text.split_whitespace().count() as u64,
    }
}

/// Pulls the query pair's two record blocks back out of a rendered prompt.
///
/// The renderer emits records under the scaffold's `Record A:` / `Record B:`
/// labels; few-shot exemplars use the same labels, so the *last* occurrence
/// is the query pair. Returns `(left, right)` as attribute/value lists in
/// block order. Values spanning blank lines are not supported here; that is
/// fine for the trimmed single-line cells the loaders produce.
pub fn extract_pair_from_prompt(
    content: &str,
    scaffold: &Scaffold,
) -> Option<(RecordAttrs, RecordAttrs)> {
    let lines: Vec<&str> = content.lines().collect();
    let left_idx = lines
        .iter()
        .rposition(|l| *l == scaffold.left_label.as_str())?;
    let right_idx = lines[left_idx..]
        .iter()
        .position(|l| *l == scaffold.right_label.as_str())?
        + left_idx;
    let left_block: Vec<&str> = lines[left_idx + 1..right_idx]
        .iter()
        .copied()
        .take_while(|l| !l.trim().is_empty())
        .collect();
    let right_block: Vec<&str> = lines[right_idx + 1..]
        .iter()
        .copied()
        .take_while(|l| !l.trim().is_empty())
        .collect();
    Some((parse_block(&left_block), parse_block(&right_block)))
}

/// Parses one record block in either serialization style.
fn parse_block(lines: &[&str]) -> RecordAttrs {
    if lines.first().is_some_and(|l| l.starts_with("COL ")) {
        let text = lines.join(" ");
        let mut attrs = Vec::new();
        for unit in text.split("COL ").skip(1) {
            if let Some((name, value)) = unit.split_once(" VAL ") {
                attrs.push((name.trim().to_string(), value.trim().to_string()));
            }
        }
        return attrs;
    }
    let mut attrs: RecordAttrs = Vec::new();
    for line in lines {
        match line.split_once(": ") {
            Some((name, value)) => attrs.push((name.to_string(), value.to_string())),
            None => match line.strip_suffix(':') {
                // "name:" with an empty value and no trailing space
                Some(name) => attrs.push((name.to_string(), String::new())),
                None => {
                    if let Some(last) = attrs.last_mut() {
                        last.1.push(' ');
                        last.1.push_str(line);
                    }
                }
            },
        }
    }
    attrs
}

fn record_from_attrs(id: &str, attrs: &[(String, String)]) -> EntityRecord {
    let mut record = EntityRecord::new(id);
    for (i, (name, value)) in attrs.iter().enumerate() {
        // Duplicate names cannot happen with renderer output; guard anyway.
        let key = if attrs[..i].iter().any(|(n, _)| n == name) {
            format!("{name}#{i}")
        } else {
            name.clone()
        };
        record.set_value(key, Some(value.clone()));
    }
    record
}

fn join_or(tokens: &[&str], empty: &str) -> String {
    if tokens.is_empty() {
        empty.to_string()
    } else {
        tokens.join(", ")
    }
}

/// Deterministic prompt-aware mock: simulates each step of every strategy
/// with a fixed token-overlap rule, so full pipelines run offline with
/// meaningful (and reproducible) decisions.
pub struct HeuristicBackend {
    scaffold: Scaffold,
    /// "Match: Yes" iff the two records' token-set Jaccard reaches this.
    jaccard_threshold: f64,
}

impl HeuristicBackend {
    pub fn new() -> Self {
        Self::with_scaffold(TemplateSet::builtin().scaffold)
    }

    /// For prompts rendered with a non-builtin template set.
    pub fn with_scaffold(scaffold: Scaffold) -> Self {
        Self {
            scaffold,
            jaccard_threshold: 0.5,
        }
    }

    fn pair(
        &self,
        request: &CompletionRequest,
    ) -> Result<(EntityRecord, EntityRecord), GatewayError> {
        let content = request
            .messages
            .last_user_content()
            .ok_or_else(|| GatewayError::ResponseMalformed("no user message".to_string()))?;
        let (left, right) = extract_pair_from_prompt(content, &self.scaffold).ok_or_else(|| {
            GatewayError::ResponseMalformed(
                "heuristic backend could not locate the record blocks".to_string(),
            )
        })?;
        Ok((
            record_from_attrs("left", &left),
            record_from_attrs("right", &right),
        ))
    }

    fn decision_line(&self, left: &EntityRecord, right: &EntityRecord) -> String {
        if lexical::jaccard(left, right) >= self.jaccard_threshold {
            self.scaffold.forced_yes.clone()
        } else {
            self.scaffold.forced_no.clone()
        }
    }

    fn token_summary(&self, left: &EntityRecord, right: &EntityRecord) -> String {
        let diff = lexical::token_diff(left, right);
        let matched = diff.matched_tokens();
        let only_left: Vec<&str> = diff.only_left.keys().map(|k| k.as_str()).collect();
        let only_right: Vec<&str> = diff.only_right.keys().map(|k| k.as_str()).collect();
        format!(
            "Matched tokens: {}. Tokens only in the first record: {}. \
             Tokens only in the second record: {}.",
            join_or(&matched, "(none)"),
            join_or(&only_left, "(none)"),
            join_or(&only_right, "(none)"),
        )
    }

    fn influential_attribute(&self, left: &EntityRecord, right: &EntityRecord) -> String {
        let mut best: Option<(&str, usize)> = None;
        for (name, value) in left.entries() {
            let left_tokens: std::collections::BTreeSet<String> =
                lexical::tokenize(value.unwrap_or("")).into_iter().collect();
            let right_tokens: std::collections::BTreeSet<String> =
                lexical::tokenize(right.value(name).unwrap_or(""))
                    .into_iter()
                    .collect();
            let overlap = left_tokens.intersection(&right_tokens).count();
            if best.is_none_or(|(_, n)| overlap > n) {
                best = Some((name, overlap));
            }
        }
        best.map(|(name, _)| name.to_string())
            .unwrap_or_else(|| "unknown".to_string())
    }

    fn respond(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let (left, right) = self.pair(request)?;
        let text = match request.tag {
            StepId::Step1Tokens => self.token_summary(&left, &right),
            StepId::Step2Attributes => format!(
                "The most influential attribute is {}, based on its token overlap.",
                self.influential_attribute(&left, &right)
            ),
            StepId::Baseline | StepId::Step3Decision | StepId::DebateSynthesis => {
                format!(
                    "Shared tokens cover a Jaccard similarity of {:.2}.\n{}",
                    lexical::jaccard(&left, &right),
                    self.decision_line(&left, &right)
                )
            }
            StepId::CotSingle => format!(
                "Step 1: {}\nStep 2: The most influential attribute is {}.\nStep 3: {}",
                self.token_summary(&left, &right),
                self.influential_attribute(&left, &right),
                self.decision_line(&left, &right)
            ),
            StepId::DebatePro => {
                let diff = lexical::token_diff(&left, &right);
                format!(
                    "The records share the tokens {} and describe compatible values, \
                     which supports treating them as the same entity.",
                    join_or(&diff.matched_tokens(), "(none)")
                )
            }
            StepId::DebateCon => {
                let diff = lexical::token_diff(&left, &right);
                let only_left: Vec<&str> = diff.only_left.keys().map(|k| k.as_str()).collect();
                let only_right: Vec<&str> = diff.only_right.keys().map(|k| k.as_str()).collect();
                format!(
                    "The first record carries {} while the second carries {}, \
                     which points to two different entities.",
                    join_or(&only_left, "(no unique tokens)"),
                    join_or(&only_right, "(no unique tokens)"),
                )
            }
        };
        Ok(text)
    }
}

impl Default for HeuristicBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl Backend for HeuristicBackend {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<BackendResponse, GatewayError> {
        let text = self.respond(request)?;
        let usage = mock_usage(request, &text);
        Ok(BackendResponse { text, usage })
    }
}

/// Replay backend: request hash to canned response text. Unmapped requests
/// fail loudly with the hash so the missing script entry is easy to add.
pub struct FixtureBackend {
    responses: HashMap<String, String>,
}

impl FixtureBackend {
    pub fn new(responses: HashMap<String, String>) -> Self {
        Self { responses }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (String, String)>) -> Self {
        Self::new(entries.into_iter().collect())
    }

    /// Loads a JSON object file: `{ "<request hash>": "<response text>" }`.
    pub fn from_file(path: &Path) -> Result<Self, GatewayError> {
        let text = fs::read_to_string(path).map_err(|e| GatewayError::Cache {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let responses: HashMap<String, String> =
            serde_json::from_str(&text).map_err(|e| GatewayError::Cache {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        Ok(Self::new(responses))
    }

    pub fn write_file(entries: &HashMap<String, String>, path: &Path) -> Result<(), GatewayError> {
        let map: std::collections::BTreeMap<&String, &String> = entries.iter().collect();
        let json = serde_json::to_string_pretty(&map).expect("fixture map serializes");
        fs::write(path, json).map_err(|e| GatewayError::Cache {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Backend for FixtureBackend {
    fn name(&self) -> &str {
        "fixture"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<BackendResponse, GatewayError> {
        let key = cache_key(request);
        let text = self
            .responses
            .get(&key)
            .cloned()
            .ok_or(GatewayError::UnmappedFixture { key })?;
        let usage = mock_usage(request, &text);
        Ok(BackendResponse { text, usage })
    }
}
