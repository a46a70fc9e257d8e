//! Strategy orchestration: runs one candidate pair through a matching
//! strategy and records the full transcript.
//!
//! Four strategies are supported: a single general prompt, the three
//! reasoning steps packed into one prompt, the three steps as a sequential
//! prompt chain (each later prompt embeds the earlier responses verbatim),
//! and a debate (independent pro and con arguments synthesized by a final
//! decision prompt). Within one pair the turns are strictly sequential;
//! distinct pairs can run concurrently against a shared gateway.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::FewShotExample;
use crate::gateway::{cache_key, Completion, CompletionRequest, Gateway, GatewayError, Usage};
use crate::prompts::{MessageList, PromptError, PromptRenderer, PromptVariant, StepId};
use crate::records::RecordPair;

/// The four matching strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Baseline,
    CotSingle,
    CotMulti,
    Debate,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Baseline,
        StrategyKind::CotSingle,
        StrategyKind::CotMulti,
        StrategyKind::Debate,
    ];

    /// The fixed prompt sequence the strategy issues per pair.
    pub fn step_sequence(self) -> &'static [StepId] {
        match self {
            StrategyKind::Baseline => &[StepId::Baseline],
            StrategyKind::CotSingle => &[StepId::CotSingle],
            StrategyKind::CotMulti => &[
                StepId::Step1Tokens,
                StepId::Step2Attributes,
                StepId::Step3Decision,
            ],
            StrategyKind::Debate => &[
                StepId::DebatePro,
                StepId::DebateCon,
                StepId::DebateSynthesis,
            ],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Baseline => "baseline",
            StrategyKind::CotSingle => "cot_single",
            StrategyKind::CotMulti => "cot_multi",
            StrategyKind::Debate => "debate",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "baseline" => Ok(StrategyKind::Baseline),
            "cot_single" | "single_prompt" => Ok(StrategyKind::CotSingle),
            "cot_multi" | "multi_prompt" => Ok(StrategyKind::CotMulti),
            "debate" => Ok(StrategyKind::Debate),
            other => Err(format!("unknown strategy: {other}")),
        }
    }
}

/// One request/response turn of a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptTurn {
    pub step: StepId,
    pub request: CompletionRequest,
    pub completion: Completion,
}

/// The ordered record of one strategy run on one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub pair_id: String,
    pub strategy: StrategyKind,
    pub variant: PromptVariant,
    pub turns: Vec<TranscriptTurn>,
    pub total_usage: Usage,
}

impl Transcript {
    /// The completion of the final (decision-bearing) turn.
    pub fn final_turn(&self) -> &TranscriptTurn {
        self.turns.last().expect("transcripts are never empty")
    }
}

/// Errors from running a strategy; the failing step is identified so callers
/// can report and skip the pair.
#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("rendering {step} for pair {pair_id}: {source}")]
    Render {
        pair_id: String,
        step: StepId,
        #[source]
        source: PromptError,
    },
    #[error("step {step} failed for pair {pair_id}: {source}")]
    Gateway {
        pair_id: String,
        step: StepId,
        #[source]
        source: GatewayError,
    },
}

impl StrategyError {
    pub fn step(&self) -> StepId {
        match self {
            StrategyError::Render { step, .. } | StrategyError::Gateway { step, .. } => *step,
        }
    }
}

/// Sampling parameters applied to every request of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub model: String,
    pub temperature: f32,
    pub max_output_tokens: u32,
}

impl Default for CompletionParams {
    fn default() -> Self {
        Self {
            model: "offline".to_string(),
            temperature: 0.0,
            max_output_tokens: 1024,
        }
    }
}

// Carries the chain context forward: earlier step responses and the debate
// arguments, whichever the strategy uses.
#[derive(Default)]
struct ChainState {
    prior: Vec<(StepId, String)>,
    pro: Option<String>,
    con: Option<String>,
}

impl ChainState {
    fn render(
        &self,
        renderer: &PromptRenderer,
        step: StepId,
        pair: &RecordPair,
        variant: &PromptVariant,
        shots: &[FewShotExample],
    ) -> Result<MessageList, PromptError> {
        match step {
            StepId::Baseline => renderer.render_baseline(pair, variant, shots),
            StepId::CotSingle => renderer.render_single_prompt_cot(pair, variant, shots),
            StepId::Step1Tokens | StepId::Step2Attributes | StepId::Step3Decision => {
                renderer.render_step(step, pair, &self.prior, variant, shots)
            }
            StepId::DebatePro | StepId::DebateCon | StepId::DebateSynthesis => renderer
                .render_debate(
                    step,
                    pair,
                    self.pro.as_deref(),
                    self.con.as_deref(),
                    variant,
                    shots,
                ),
        }
    }

    fn absorb(&mut self, step: StepId, text: &str) {
        match step {
            StepId::Step1Tokens | StepId::Step2Attributes => {
                self.prior.push((step, text.to_string()));
            }
            StepId::DebatePro => self.pro = Some(text.to_string()),
            StepId::DebateCon => self.con = Some(text.to_string()),
            _ => {}
        }
    }
}

/// Runs strategies against a gateway with fixed rendering and sampling
/// settings.
pub struct StrategyRunner {
    renderer: PromptRenderer,
    gateway: Arc<Gateway>,
    params: CompletionParams,
}

impl StrategyRunner {
    pub fn new(renderer: PromptRenderer, gateway: Arc<Gateway>) -> Self {
        Self {
            renderer,
            gateway,
            params: CompletionParams::default(),
        }
    }

    pub fn with_params(mut self, params: CompletionParams) -> Self {
        self.params = params;
        self
    }

    pub fn renderer(&self) -> &PromptRenderer {
        &self.renderer
    }

    pub fn gateway(&self) -> &Arc<Gateway> {
        &self.gateway
    }

    pub fn params(&self) -> &CompletionParams {
        &self.params
    }

    /// Runs `pair` through `kind`, returning the full transcript. A failed
    /// step aborts the remaining steps for the pair: no partial decision is
    /// produced.
    pub fn run(
        &self,
        kind: StrategyKind,
        pair: &RecordPair,
        variant: &PromptVariant,
        shots: &[FewShotExample],
    ) -> Result<Transcript, StrategyError> {
        let mut state = ChainState::default();
        let mut turns = Vec::new();
        let mut total_usage = Usage::default();
        for &step in kind.step_sequence() {
            let messages = state
                .render(&self.renderer, step, pair, variant, shots)
                .map_err(|source| StrategyError::Render {
                    pair_id: pair.pair_id.clone(),
                    step,
                    source,
                })?;
            let request = CompletionRequest {
                model: self.params.model.clone(),
                messages,
                temperature: self.params.temperature,
                max_output_tokens: self.params.max_output_tokens,
                tag: step,
            };
            let completion =
                self.gateway
                    .complete(&request)
                    .map_err(|source| StrategyError::Gateway {
                        pair_id: pair.pair_id.clone(),
                        step,
                        source,
                    })?;
            state.absorb(step, &completion.text);
            total_usage.merge(completion.usage);
            turns.push(TranscriptTurn {
                step,
                request,
                completion,
            });
        }
        Ok(Transcript {
            pair_id: pair.pair_id.clone(),
            strategy: kind,
            variant: *variant,
            turns,
            total_usage,
        })
    }
}

/// Walks a strategy's prompt chain without a gateway, producing
/// `(request hash, response)` fixture entries. `respond` supplies the scripted
/// response for each step; chained prompts embed those responses exactly as a
/// live run would.
pub fn script_strategy(
    renderer: &PromptRenderer,
    params: &CompletionParams,
    kind: StrategyKind,
    pair: &RecordPair,
    variant: &PromptVariant,
    shots: &[FewShotExample],
    respond: &mut dyn FnMut(StepId, &RecordPair) -> String,
) -> Result<Vec<(String, String)>, StrategyError> {
    let mut state = ChainState::default();
    let mut entries = Vec::new();
    for &step in kind.step_sequence() {
        let messages = state
            .render(renderer, step, pair, variant, shots)
            .map_err(|source| StrategyError::Render {
                pair_id: pair.pair_id.clone(),
                step,
                source,
            })?;
        let request = CompletionRequest {
            model: params.model.clone(),
            messages,
            temperature: params.temperature,
            max_output_tokens: params.max_output_tokens,
            tag: step,
        };
        let response = respond(step, pair);
        state.absorb(step, &response);
        entries.push((cache_key(&request), response));
    }
    Ok(entries)
}
