//! Prompt rendering across the design space: task frame, verbiage, response
//! frame, shot count, and lexical hints, for every reasoning step.
//!
//! Wording lives in a versioned [`TemplateSet`] (the built-in set is compiled
//! in; alternates load from a TOML file) so that a run's exact prompt text is
//! auditable. Rendering is a pure function of its arguments: the same pair,
//! variant, and shots always produce byte-identical messages.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::datasets::FewShotExample;
use crate::lexical;
use crate::records::{
    serialize_record, AttributeSchema, RecordError, RecordPair, SerializationStyle,
};

/// Errors raised while loading templates or rendering prompts.
#[derive(Debug, Error)]
pub enum PromptError {
    #[error("expected {expected} few-shot examples, got {actual}")]
    ShotCountMismatch { expected: usize, actual: usize },
    #[error("step {step} requires prior responses {needs:?}, got {got:?}")]
    MissingPrior {
        step: StepId,
        needs: Vec<StepId>,
        got: Vec<StepId>,
    },
    #[error("prior responses for step {step} are out of order: expected {needs:?}, got {got:?}")]
    WrongPriorOrder {
        step: StepId,
        needs: Vec<StepId>,
        got: Vec<StepId>,
    },
    #[error("debate synthesis requires both a pro and a con argument")]
    MissingArguments,
    #[error("{0} is not a step of the three-step chain")]
    NotAChainStep(StepId),
    #[error("template file {path}: {reason}")]
    TemplateFile { path: PathBuf, reason: String },
    #[error("template set is missing instructions for {step}")]
    MissingTemplate { step: String },
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("invalid message list: {0}")]
    InvalidMessages(String),
}

// ---------------------------------------------------------------------------
// Variant axes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskFrame {
    General,
    DomainSpecific,
}

impl std::str::FromStr for TaskFrame {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "general" => Ok(TaskFrame::General),
            "domain_specific" | "domain" => Ok(TaskFrame::DomainSpecific),
            other => Err(format!("unknown task frame: {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verbiage {
    Simple,
    Complex,
}

impl std::str::FromStr for Verbiage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(Verbiage::Simple),
            "complex" => Ok(Verbiage::Complex),
            other => Err(format!("unknown verbiage: {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseFrame {
    Free,
    Forced,
}

impl std::str::FromStr for ResponseFrame {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "free" => Ok(ResponseFrame::Free),
            "forced" => Ok(ResponseFrame::Forced),
            other => Err(format!("unknown response frame: {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hints {
    Off,
    On,
}

impl std::str::FromStr for Hints {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" | "false" => Ok(Hints::Off),
            "on" | "true" => Ok(Hints::On),
            other => Err(format!("unknown hints setting: {other}")),
        }
    }
}

/// One point in the prompt design space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptVariant {
    pub task_frame: TaskFrame,
    pub verbiage: Verbiage,
    pub response_frame: ResponseFrame,
    pub shots: usize,
    pub hints: Hints,
}

impl Default for PromptVariant {
    fn default() -> Self {
        Self {
            task_frame: TaskFrame::General,
            verbiage: Verbiage::Simple,
            response_frame: ResponseFrame::Forced,
            shots: 0,
            hints: Hints::Off,
        }
    }
}

impl PromptVariant {
    /// Short slug for directory and file names, e.g.
    /// `general-simple-forced-k0-hints_off`.
    pub fn slug(&self) -> String {
        format!(
            "{}-{}-{}-k{}-hints_{}",
            match self.task_frame {
                TaskFrame::General => "general",
                TaskFrame::DomainSpecific => "domain",
            },
            match self.verbiage {
                Verbiage::Simple => "simple",
                Verbiage::Complex => "complex",
            },
            match self.response_frame {
                ResponseFrame::Free => "free",
                ResponseFrame::Forced => "forced",
            },
            self.shots,
            match self.hints {
                Hints::Off => "off",
                Hints::On => "on",
            },
        )
    }
}

/// Full cartesian product of the design space over the given shot counts, in
/// a fixed order (task frame, verbiage, response frame, shots, hints).
pub fn enumerate_variants(shot_counts: &[usize]) -> Vec<PromptVariant> {
    assert!(!shot_counts.is_empty(), "shot_counts must be non-empty");
    let mut variants = Vec::new();
    for task_frame in [TaskFrame::General, TaskFrame::DomainSpecific] {
        for verbiage in [Verbiage::Simple, Verbiage::Complex] {
            for response_frame in [ResponseFrame::Free, ResponseFrame::Forced] {
                for &shots in shot_counts {
                    for hints in [Hints::Off, Hints::On] {
                        variants.push(PromptVariant {
                            task_frame,
                            verbiage,
                            response_frame,
                            shots,
                            hints,
                        });
                    }
                }
            }
        }
    }
    variants
}

// ---------------------------------------------------------------------------
// Steps and messages
// ---------------------------------------------------------------------------

/// Identifies which prompt of which strategy a message list (or completion)
/// belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepId {
    Baseline,
    CotSingle,
    Step1Tokens,
    Step2Attributes,
    Step3Decision,
    DebatePro,
    DebateCon,
    DebateSynthesis,
}

impl StepId {
    pub const ALL: [StepId; 8] = [
        StepId::Baseline,
        StepId::CotSingle,
        StepId::Step1Tokens,
        StepId::Step2Attributes,
        StepId::Step3Decision,
        StepId::DebatePro,
        StepId::DebateCon,
        StepId::DebateSynthesis,
    ];

    pub fn key(self) -> &'static str {
        match self {
            StepId::Baseline => "baseline",
            StepId::CotSingle => "cot_single",
            StepId::Step1Tokens => "step1_tokens",
            StepId::Step2Attributes => "step2_attributes",
            StepId::Step3Decision => "step3_decision",
            StepId::DebatePro => "debate_pro",
            StepId::DebateCon => "debate_con",
            StepId::DebateSynthesis => "debate_synthesis",
        }
    }

    /// Steps whose prompt ends with the response-frame instruction and may
    /// embed few-shot exemplars.
    pub fn is_decision_bearing(self) -> bool {
        matches!(
            self,
            StepId::Baseline | StepId::CotSingle | StepId::Step3Decision | StepId::DebateSynthesis
        )
    }
}

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// An ordered, validated chat message list: non-empty, any system preamble
/// first, then user/assistant turns alternating starting with user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Message>", into = "Vec<Message>")]
pub struct MessageList(Vec<Message>);

impl MessageList {
    pub fn new(messages: Vec<Message>) -> Result<Self, PromptError> {
        if messages.is_empty() {
            return Err(PromptError::InvalidMessages("empty".to_string()));
        }
        let body_start = messages
            .iter()
            .position(|m| m.role != Role::System)
            .unwrap_or(messages.len());
        if messages[body_start..]
            .iter()
            .any(|m| m.role == Role::System)
        {
            return Err(PromptError::InvalidMessages(
                "system messages must come first".to_string(),
            ));
        }
        for (i, message) in messages[body_start..].iter().enumerate() {
            let expected = if i % 2 == 0 {
                Role::User
            } else {
                Role::Assistant
            };
            if message.role != expected {
                return Err(PromptError::InvalidMessages(format!(
                    "turn {i} after the preamble must be {}",
                    expected.as_str()
                )));
            }
        }
        Ok(Self(messages))
    }

    pub fn single_user(content: impl Into<String>) -> Self {
        Self(vec![Message::user(content)])
    }

    pub fn messages(&self) -> &[Message] {
        &self.0
    }

    /// Content of the last user message; prompts rendered here always have
    /// one.
    pub fn last_user_content(&self) -> Option<&str> {
        self.0
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
    }

    /// Whitespace token count over all message contents; the mock usage rule.
    pub fn whitespace_tokens(&self) -> u64 {
        self.0
            .iter()
            .map(|m| m.content.split_whitespace().count() as u64)
            .sum()
    }
}

impl TryFrom<Vec<Message>> for MessageList {
    type Error = PromptError;

    fn try_from(messages: Vec<Message>) -> Result<Self, Self::Error> {
        MessageList::new(messages)
    }
}

impl From<MessageList> for Vec<Message> {
    fn from(list: MessageList) -> Self {
        list.0
    }
}

// ---------------------------------------------------------------------------
// Template set
// ---------------------------------------------------------------------------

/// Structural wording shared by all prompts: labels, headers, and the
/// response-frame instructions and exemplar answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scaffold {
    pub left_label: String,
    pub right_label: String,
    pub examples_header: String,
    pub example_answer_prefix: String,
    pub hint_tokens_header: String,
    pub hint_phrases_header: String,
    pub hint_empty: String,
    pub prior_step1_header: String,
    pub prior_step2_header: String,
    pub pro_header: String,
    pub con_header: String,
    pub forced_instruction: String,
    pub free_instruction: String,
    pub forced_yes: String,
    pub forced_no: String,
    pub free_yes: String,
    pub free_no: String,
}

impl Scaffold {
    pub fn frame_instruction(&self, frame: ResponseFrame) -> &str {
        match frame {
            ResponseFrame::Forced => &self.forced_instruction,
            ResponseFrame::Free => &self.free_instruction,
        }
    }

    /// The exemplar answer line for a gold label under a response frame.
    pub fn answer_text(&self, frame: ResponseFrame, is_match: bool) -> &str {
        match (frame, is_match) {
            (ResponseFrame::Forced, true) => &self.forced_yes,
            (ResponseFrame::Forced, false) => &self.forced_no,
            (ResponseFrame::Free, true) => &self.free_yes,
            (ResponseFrame::Free, false) => &self.free_no,
        }
    }
}

/// Instruction wording for one step across task frame and verbiage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionTable {
    pub general_simple: String,
    pub general_complex: String,
    pub domain_simple: String,
    pub domain_complex: String,
}

impl InstructionTable {
    fn get(&self, frame: TaskFrame, verbiage: Verbiage) -> &str {
        match (frame, verbiage) {
            (TaskFrame::General, Verbiage::Simple) => &self.general_simple,
            (TaskFrame::General, Verbiage::Complex) => &self.general_complex,
            (TaskFrame::DomainSpecific, Verbiage::Simple) => &self.domain_simple,
            (TaskFrame::DomainSpecific, Verbiage::Complex) => &self.domain_complex,
        }
    }
}

/// Versioned prompt wording: one instruction table per step plus the shared
/// scaffold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub version: String,
    pub scaffold: Scaffold,
    pub instructions: BTreeMap<String, InstructionTable>,
}

const BUILTIN_TEMPLATES: &str = include_str!("default_templates.toml");

impl TemplateSet {
    /// The compiled-in wording.
    pub fn builtin() -> Self {
        toml::from_str::<TemplateSet>(BUILTIN_TEMPLATES)
            .expect("built-in templates parse")
            .validated()
            .expect("built-in templates are complete")
    }

    /// Loads wording from a TOML file.
    pub fn load(path: &Path) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path).map_err(|e| PromptError::TemplateFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let set: TemplateSet = toml::from_str(&text).map_err(|e| PromptError::TemplateFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        set.validated()
    }

    fn validated(self) -> Result<Self, PromptError> {
        for step in StepId::ALL {
            if !self.instructions.contains_key(step.key()) {
                return Err(PromptError::MissingTemplate {
                    step: step.key().to_string(),
                });
            }
        }
        Ok(self)
    }

    pub fn instruction(
        &self,
        step: StepId,
        frame: TaskFrame,
        verbiage: Verbiage,
    ) -> Result<&str, PromptError> {
        self.instructions
            .get(step.key())
            .map(|table| table.get(frame, verbiage))
            .ok_or_else(|| PromptError::MissingTemplate {
                step: step.key().to_string(),
            })
    }

    /// Content hash of the whole set, for report provenance.
    pub fn content_hash(&self) -> String {
        let canonical = toml::to_string(self).expect("template set serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex::encode(hasher.finalize())
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

// ---------------------------------------------------------------------------
// Renderer
// ---------------------------------------------------------------------------

/// Rendering knobs that are fixed for a run rather than part of the design
/// space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub style: SerializationStyle,
    /// Minimum phrase length for the hint block's common phrases.
    pub hint_min_phrase_tokens: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            style: SerializationStyle::LabeledLines,
            hint_min_phrase_tokens: 2,
        }
    }
}

/// Renders every prompt kind for one dataset: holds the wording, the schema,
/// the domain word for domain-specific frames, and the serialization style.
#[derive(Debug, Clone)]
pub struct PromptRenderer {
    templates: TemplateSet,
    schema: AttributeSchema,
    domain: String,
    options: RenderOptions,
}

impl PromptRenderer {
    pub fn new(
        templates: TemplateSet,
        schema: AttributeSchema,
        domain: impl Into<String>,
        options: RenderOptions,
    ) -> Self {
        Self {
            templates,
            schema,
            domain: domain.into(),
            options,
        }
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn scaffold(&self) -> &Scaffold {
        &self.templates.scaffold
    }

    pub fn options(&self) -> RenderOptions {
        self.options
    }

    fn instruction(&self, step: StepId, variant: &PromptVariant) -> Result<String, PromptError> {
        let raw = self
            .templates
            .instruction(step, variant.task_frame, variant.verbiage)?;
        Ok(raw.replace("{domain}", &self.domain))
    }

    fn pair_block(&self, pair: &RecordPair) -> Result<String, PromptError> {
        let scaffold = self.scaffold();
        let left = serialize_record(&pair.left, &self.schema, self.options.style)?;
        let right = serialize_record(&pair.right, &self.schema, self.options.style)?;
        Ok(format!(
            "{}\n{}\n\n{}\n{}",
            scaffold.left_label, left, scaffold.right_label, right
        ))
    }

    fn examples_block(
        &self,
        shots: &[FewShotExample],
        variant: &PromptVariant,
    ) -> Result<Option<String>, PromptError> {
        if shots.len() != variant.shots {
            return Err(PromptError::ShotCountMismatch {
                expected: variant.shots,
                actual: shots.len(),
            });
        }
        if shots.is_empty() {
            return Ok(None);
        }
        let scaffold = self.scaffold();
        let mut block = scaffold.examples_header.clone();
        for shot in shots {
            block.push_str("\n\n");
            block.push_str(&self.pair_block(&shot.pair)?);
            block.push_str("\n\n");
            block.push_str(&scaffold.example_answer_prefix);
            block.push_str(scaffold.answer_text(variant.response_frame, shot.answer.is_match()));
        }
        Ok(Some(block))
    }

    fn hints_block(&self, pair: &RecordPair, variant: &PromptVariant) -> Option<String> {
        if variant.hints == Hints::Off {
            return None;
        }
        let scaffold = self.scaffold();
        let diff = lexical::token_diff(&pair.left, &pair.right);
        let tokens = diff.matched_tokens();
        let token_text = if tokens.is_empty() {
            scaffold.hint_empty.clone()
        } else {
            tokens.join(", ")
        };
        let phrases = lexical::common_phrases(
            &pair.left,
            &pair.right,
            self.options.hint_min_phrase_tokens.max(1),
        );
        let phrase_text = if phrases.is_empty() {
            scaffold.hint_empty.clone()
        } else {
            phrases
                .iter()
                .map(|p| format!("\"{}\"", p.text()))
                .collect::<Vec<_>>()
                .join("; ")
        };
        Some(format!(
            "{} {}\n{} {}",
            scaffold.hint_tokens_header, token_text, scaffold.hint_phrases_header, phrase_text
        ))
    }

    fn assemble(&self, blocks: Vec<Option<String>>) -> MessageList {
        let content = blocks
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join("\n\n");
        MessageList::single_user(content)
    }

    /// The single-prompt strategy without reasoning steps: instruction,
    /// exemplars, the pair, hints, and the response-frame instruction.
    pub fn render_baseline(
        &self,
        pair: &RecordPair,
        variant: &PromptVariant,
        shots: &[FewShotExample],
    ) -> Result<MessageList, PromptError> {
        let scaffold = self.scaffold();
        Ok(self.assemble(vec![
            Some(self.instruction(StepId::Baseline, variant)?),
            self.examples_block(shots, variant)?,
            Some(self.pair_block(pair)?),
            self.hints_block(pair, variant),
            Some(
                scaffold
                    .frame_instruction(variant.response_frame)
                    .to_string(),
            ),
        ]))
    }

    /// All three reasoning steps in one prompt.
    pub fn render_single_prompt_cot(
        &self,
        pair: &RecordPair,
        variant: &PromptVariant,
        shots: &[FewShotExample],
    ) -> Result<MessageList, PromptError> {
        let scaffold = self.scaffold();
        Ok(self.assemble(vec![
            Some(self.instruction(StepId::CotSingle, variant)?),
            self.examples_block(shots, variant)?,
            Some(self.pair_block(pair)?),
            self.hints_block(pair, variant),
            Some(
                scaffold
                    .frame_instruction(variant.response_frame)
                    .to_string(),
            ),
        ]))
    }

    /// One step of the three-prompt chain. `prior` must hold exactly the
    /// responses of the earlier chain steps, in chain order; each is embedded
    /// verbatim.
    pub fn render_step(
        &self,
        step: StepId,
        pair: &RecordPair,
        prior: &[(StepId, String)],
        variant: &PromptVariant,
        shots: &[FewShotExample],
    ) -> Result<MessageList, PromptError> {
        let needs: Vec<StepId> = match step {
            StepId::Step1Tokens => vec![],
            StepId::Step2Attributes => vec![StepId::Step1Tokens],
            StepId::Step3Decision => vec![StepId::Step1Tokens, StepId::Step2Attributes],
            other => return Err(PromptError::NotAChainStep(other)),
        };
        let got: Vec<StepId> = prior.iter().map(|(s, _)| *s).collect();
        if got != needs {
            let mut sorted_got = got.clone();
            let mut sorted_needs = needs.clone();
            sorted_got.sort();
            sorted_needs.sort();
            return Err(if sorted_got == sorted_needs {
                PromptError::WrongPriorOrder { step, needs, got }
            } else {
                PromptError::MissingPrior { step, needs, got }
            });
        }

        let scaffold = self.scaffold();
        let mut blocks = vec![
            Some(self.instruction(step, variant)?),
            if step.is_decision_bearing() {
                self.examples_block(shots, variant)?
            } else {
                None
            },
            Some(self.pair_block(pair)?),
            self.hints_block(pair, variant),
        ];
        for (prior_step, response) in prior {
            let header = match prior_step {
                StepId::Step1Tokens => &scaffold.prior_step1_header,
                StepId::Step2Attributes => &scaffold.prior_step2_header,
                _ => unreachable!("prior steps validated above"),
            };
            blocks.push(Some(format!("{header}\n{response}")));
        }
        if step.is_decision_bearing() {
            blocks.push(Some(
                scaffold
                    .frame_instruction(variant.response_frame)
                    .to_string(),
            ));
        }
        Ok(self.assemble(blocks))
    }

    /// One debate phase. The pro and con phases look only at the records; the
    /// synthesis phase requires both argument texts and embeds them verbatim.
    pub fn render_debate(
        &self,
        phase: StepId,
        pair: &RecordPair,
        pro: Option<&str>,
        con: Option<&str>,
        variant: &PromptVariant,
        shots: &[FewShotExample],
    ) -> Result<MessageList, PromptError> {
        let scaffold = self.scaffold();
        match phase {
            StepId::DebatePro | StepId::DebateCon => Ok(self.assemble(vec![
                Some(self.instruction(phase, variant)?),
                Some(self.pair_block(pair)?),
                self.hints_block(pair, variant),
            ])),
            StepId::DebateSynthesis => {
                let (pro, con) = match (pro, con) {
                    (Some(p), Some(c)) => (p, c),
                    _ => return Err(PromptError::MissingArguments),
                };
                Ok(self.assemble(vec![
                    Some(self.instruction(phase, variant)?),
                    self.examples_block(shots, variant)?,
                    Some(self.pair_block(pair)?),
                    self.hints_block(pair, variant),
                    Some(format!("{}\n{pro}", scaffold.pro_header)),
                    Some(format!("{}\n{con}", scaffold.con_header)),
                    Some(
                        scaffold
                            .frame_instruction(variant.response_frame)
                            .to_string(),
                    ),
                ]))
            }
            other => Err(PromptError::NotAChainStep(other)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexical;
    use crate::records::{EntityRecord, GoldLabel, RecordPair};

    fn schema() -> AttributeSchema {
        AttributeSchema::new("shop", vec!["title".into(), "price".into()]).unwrap()
    }

    fn pair() -> RecordPair {
        RecordPair::new(
            "p1",
            EntityRecord::new("l")
                .with_value("title", Some("canon eos 5d"))
                .with_value("price", Some("499")),
            EntityRecord::new("r")
                .with_value("title", Some("canon eos 5d body"))
                .with_value("price", Some("450")),
            Some(GoldLabel::MATCH),
        )
    }

    fn shot(id: &str, positive: bool) -> FewShotExample {
        let gold = if positive {
            GoldLabel::MATCH
        } else {
            GoldLabel::NO_MATCH
        };
        FewShotExample {
            pair: RecordPair::new(
                id,
                EntityRecord::new("sl").with_value("title", Some("apple ipad")),
                EntityRecord::new("sr").with_value("title", Some("apple ipad 2")),
                Some(gold),
            ),
            answer: gold,
        }
    }

    fn renderer() -> PromptRenderer {
        PromptRenderer::new(
            TemplateSet::builtin(),
            schema(),
            "product",
            RenderOptions::default(),
        )
    }

    fn variant() -> PromptVariant {
        PromptVariant::default()
    }

    fn content(messages: &MessageList) -> &str {
        messages.last_user_content().unwrap()
    }

    #[test]
    fn baseline_forced_ends_with_template_instruction() {
        let r = renderer();
        let messages = r.render_baseline(&pair(), &variant(), &[]).unwrap();
        let text = content(&messages);
        assert!(text.ends_with(&r.scaffold().forced_instruction));
        assert!(text.contains("Match: Yes/No"));
    }

    #[test]
    fn baseline_general_frame_uses_the_general_instruction() {
        let r = renderer();
        let messages = r.render_baseline(&pair(), &variant(), &[]).unwrap();
        assert!(content(&messages).contains("Determine if these two objects match"));
    }

    #[test]
    fn baseline_zero_shot_has_no_example_block() {
        let r = renderer();
        let messages = r.render_baseline(&pair(), &variant(), &[]).unwrap();
        assert!(!content(&messages).contains(&r.scaffold().examples_header));
    }

    #[test]
    fn baseline_embeds_each_exemplar_with_its_answer() {
        let r = renderer();
        let mut v = variant();
        v.shots = 2;
        let shots = [shot("s1", true), shot("s2", false)];
        let messages = r.render_baseline(&pair(), &v, &shots).unwrap();
        let text = content(&messages);
        assert!(text.contains(&r.scaffold().examples_header));
        let prefix = &r.scaffold().example_answer_prefix;
        assert_eq!(text.matches(prefix.as_str()).count(), 2);
        assert!(text.contains(&format!("{prefix}{}", r.scaffold().forced_yes)));
        assert!(text.contains(&format!("{prefix}{}", r.scaffold().forced_no)));
    }

    #[test]
    fn shot_count_mismatch_is_rejected() {
        let r = renderer();
        let mut v = variant();
        v.shots = 2;
        let err = r.render_baseline(&pair(), &v, &[]).unwrap_err();
        assert!(matches!(
            err,
            PromptError::ShotCountMismatch {
                expected: 2,
                actual: 0
            }
        ));
    }

    #[test]
    fn step1_contains_both_serialized_records() {
        let r = renderer();
        let p = pair();
        let messages = r
            .render_step(StepId::Step1Tokens, &p, &[], &variant(), &[])
            .unwrap();
        let text = content(&messages);
        let left = serialize_record(&p.left, &schema(), SerializationStyle::LabeledLines).unwrap();
        let right =
            serialize_record(&p.right, &schema(), SerializationStyle::LabeledLines).unwrap();
        assert!(text.contains(&left));
        assert!(text.contains(&right));
        assert!(
            text.contains("identify the matched and unmatched tokens")
                || text.contains("Identify the matched and unmatched tokens")
        );
    }

    #[test]
    fn step2_embeds_step1_response_verbatim() {
        let r = renderer();
        let response = "Matched tokens: canon, eos, 5d. Only left: 499.";
        let messages = r
            .render_step(
                StepId::Step2Attributes,
                &pair(),
                &[(StepId::Step1Tokens, response.to_string())],
                &variant(),
                &[],
            )
            .unwrap();
        let text = content(&messages);
        assert!(text.contains(response));
        assert!(text.contains("attributes are most influential"));
    }

    #[test]
    fn step3_requires_both_priors_in_order() {
        let r = renderer();
        let err = r
            .render_step(StepId::Step3Decision, &pair(), &[], &variant(), &[])
            .unwrap_err();
        assert!(matches!(err, PromptError::MissingPrior { .. }));

        let swapped = [
            (StepId::Step2Attributes, "attrs".to_string()),
            (StepId::Step1Tokens, "tokens".to_string()),
        ];
        let err = r
            .render_step(StepId::Step3Decision, &pair(), &swapped, &variant(), &[])
            .unwrap_err();
        assert!(matches!(err, PromptError::WrongPriorOrder { .. }));

        let ordered = [
            (StepId::Step1Tokens, "token analysis text".to_string()),
            (
                StepId::Step2Attributes,
                "attribute analysis text".to_string(),
            ),
        ];
        let messages = r
            .render_step(StepId::Step3Decision, &pair(), &ordered, &variant(), &[])
            .unwrap();
        let text = content(&messages);
        assert!(text.contains("token analysis text"));
        assert!(text.contains("attribute analysis text"));
        assert!(text.contains("refer to the same real-world entity"));
        assert!(text.ends_with(&r.scaffold().forced_instruction));
    }

    #[test]
    fn baseline_is_not_a_chain_step() {
        let r = renderer();
        let err = r
            .render_step(StepId::Baseline, &pair(), &[], &variant(), &[])
            .unwrap_err();
        assert!(matches!(err, PromptError::NotAChainStep(StepId::Baseline)));
    }

    #[test]
    fn cot_single_lists_the_three_steps_in_order() {
        let r = renderer();
        let messages = r
            .render_single_prompt_cot(&pair(), &variant(), &[])
            .unwrap();
        let text = content(&messages);
        let s1 = text.find("Step 1").expect("step 1 present");
        let s2 = text.find("Step 2").expect("step 2 present");
        let s3 = text.find("Step 3").expect("step 3 present");
        assert!(s1 < s2 && s2 < s3);
        // tokens -> attributes -> decision ordering inside the instructions
        let tokens = text.find("matched and unmatched tokens").unwrap();
        let attrs = text.find("attributes are most influential").unwrap();
        let decision = text.find("refer to the same real-world entity").unwrap();
        assert!(tokens < attrs && attrs < decision);
        assert!(text.contains("Match: Yes/No"));
    }

    #[test]
    fn rendering_is_byte_identical_on_repeat() {
        let r = renderer();
        let mut v = variant();
        v.hints = Hints::On;
        v.shots = 1;
        let shots = [shot("s1", true)];
        for _ in 0..3 {
            assert_eq!(
                r.render_baseline(&pair(), &v, &shots).unwrap(),
                r.render_baseline(&pair(), &v, &shots).unwrap()
            );
            assert_eq!(
                r.render_single_prompt_cot(&pair(), &v, &shots).unwrap(),
                r.render_single_prompt_cot(&pair(), &v, &shots).unwrap()
            );
        }
    }

    #[test]
    fn debate_pro_asks_only_for_support() {
        let r = renderer();
        let messages = r
            .render_debate(StepId::DebatePro, &pair(), None, None, &variant(), &[])
            .unwrap();
        let text = content(&messages);
        assert!(text.contains("in favor of a match"));
        assert!(!text.contains("do not refer"));
        assert!(!text.contains("against a match"));
    }

    #[test]
    fn debate_synthesis_embeds_both_arguments() {
        let r = renderer();
        let pro = "shared tokens argue for a match";
        let con = "price gap argues against";
        let messages = r
            .render_debate(
                StepId::DebateSynthesis,
                &pair(),
                Some(pro),
                Some(con),
                &variant(),
                &[],
            )
            .unwrap();
        let text = content(&messages);
        assert!(text.contains(pro));
        assert!(text.contains(con));
        assert!(text.ends_with(&r.scaffold().forced_instruction));
    }

    #[test]
    fn debate_synthesis_requires_both_arguments() {
        let r = renderer();
        for (pro, con) in [(None, None), (Some("p"), None), (None, Some("c"))] {
            let err = r
                .render_debate(StepId::DebateSynthesis, &pair(), pro, con, &variant(), &[])
                .unwrap_err();
            assert!(matches!(err, PromptError::MissingArguments));
        }
    }

    #[test]
    fn hints_appear_iff_enabled_and_are_shared_tokens() {
        let r = renderer();
        let p = pair();
        let off = r.render_baseline(&p, &variant(), &[]).unwrap();
        assert!(!content(&off).contains(&r.scaffold().hint_tokens_header));

        let mut v = variant();
        v.hints = Hints::On;
        let on = r.render_baseline(&p, &v, &[]).unwrap();
        let text = content(&on);
        assert!(text.contains(&r.scaffold().hint_tokens_header));
        assert!(text.contains(&r.scaffold().hint_phrases_header));

        // Every hinted token occurs in both records' serializations.
        let tokens_line = text
            .lines()
            .find(|l| l.starts_with(&r.scaffold().hint_tokens_header))
            .unwrap();
        let listed = tokens_line
            .strip_prefix(&r.scaffold().hint_tokens_header)
            .unwrap()
            .trim();
        let left_text =
            serialize_record(&p.left, &schema(), SerializationStyle::LabeledLines).unwrap();
        let right_text =
            serialize_record(&p.right, &schema(), SerializationStyle::LabeledLines).unwrap();
        let left_tokens = lexical::tokenize(&left_text);
        let right_tokens = lexical::tokenize(&right_text);
        for token in listed.split(", ") {
            assert!(
                left_tokens.iter().any(|t| t == token),
                "{token} not in left"
            );
            assert!(
                right_tokens.iter().any(|t| t == token),
                "{token} not in right"
            );
        }
    }

    #[test]
    fn domain_specific_frame_carries_the_domain_word() {
        let r = renderer();
        let mut v = variant();
        v.task_frame = TaskFrame::DomainSpecific;
        let messages = r.render_baseline(&pair(), &v, &[]).unwrap();
        assert!(content(&messages).contains("product"));
        assert!(!content(&messages).contains("{domain}"));
    }

    #[test]
    fn enumerate_variants_is_the_full_product() {
        let one = enumerate_variants(&[0]);
        assert_eq!(one.len(), 16);
        let two = enumerate_variants(&[0, 2]);
        assert_eq!(two.len(), 32);
        let unique: std::collections::HashSet<_> = two.iter().collect();
        assert_eq!(unique.len(), 32);
    }

    #[test]
    fn message_list_validates_shape() {
        assert!(MessageList::new(vec![]).is_err());
        assert!(MessageList::new(vec![Message::assistant("hi")]).is_err());
        assert!(MessageList::new(vec![Message::user("a"), Message::user("b")]).is_err());
        assert!(MessageList::new(vec![
            Message::user("a"),
            Message::assistant("b"),
            Message::system("c"),
        ])
        .is_err());
        assert!(MessageList::new(vec![
            Message::system("s"),
            Message::user("a"),
            Message::assistant("b"),
            Message::user("c"),
        ])
        .is_ok());
    }

    #[test]
    fn builtin_templates_cover_every_step() {
        let set = TemplateSet::builtin();
        for step in StepId::ALL {
            for frame in [TaskFrame::General, TaskFrame::DomainSpecific] {
                for verbiage in [Verbiage::Simple, Verbiage::Complex] {
                    assert!(!set.instruction(step, frame, verbiage).unwrap().is_empty());
                }
            }
        }
    }

    #[test]
    fn template_set_loads_from_file_and_hash_tracks_content() {
        let set = TemplateSet::builtin();
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("templates.toml");
        std::fs::write(&path, toml::to_string(&set).unwrap()).unwrap();
        let loaded = TemplateSet::load(&path).unwrap();
        assert_eq!(loaded, set);
        assert_eq!(loaded.content_hash(), set.content_hash());

        let mut altered = set.clone();
        altered
            .instructions
            .get_mut("baseline")
            .unwrap()
            .general_simple = "Changed wording.".to_string();
        assert_ne!(altered.content_hash(), set.content_hash());

        let mut missing = set.clone();
        missing.instructions.remove("debate_pro");
        std::fs::write(&path, toml::to_string(&missing).unwrap()).unwrap();
        assert!(matches!(
            TemplateSet::load(&path),
            Err(PromptError::MissingTemplate { .. })
        ));
    }
}
