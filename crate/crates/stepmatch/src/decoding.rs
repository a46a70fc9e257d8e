//! Parsing completions into match decisions.
//!
//! Forced-frame parsing scans for the last templated answer line; free-frame
//! parsing scores affirmative against negative cues in the final paragraph.
//! Parsing is total: text that supports no decision yields the configured
//! default with an explicit `UnparseableDefaulted` status, and the rate of
//! such defaults is a first-class report field downstream.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::prompts::ResponseFrame;
use crate::strategies::Transcript;

/// A binary match decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Match,
    NoMatch,
}

impl Decision {
    pub fn is_match(self) -> bool {
        self == Decision::Match
    }
}

/// How the decision was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    /// The templated `Match: Yes/No` line was found.
    ForcedExact,
    /// Inferred from free-text cues.
    FreeInferred,
    /// No signal; the configured default was applied.
    UnparseableDefaulted,
}

/// A parsed decision for one pair, with the raw final-turn text as evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPrediction {
    pub pair_id: String,
    pub decision: Decision,
    pub parse_status: ParseStatus,
    pub evidence: String,
}

fn forced_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\bmatch\b\s*[:=\-]?\s*\b(yes|no)\b").expect("forced pattern compiles")
    })
}

static AFFIRMATIVE_CUES: [&str; 3] = ["same entity", "refer to the same", r"\byes\b"];
static NEGATIVE_CUES: [&str; 3] = ["different", "not the same", r"\bno\b"];

fn cue_pattern(cue: &str) -> Regex {
    let pattern = if cue.starts_with(r"\b") {
        format!("(?i){cue}")
    } else {
        format!("(?i){}", regex::escape(cue))
    };
    Regex::new(&pattern).expect("cue pattern compiles")
}

fn cue_patterns() -> &'static (Vec<Regex>, Vec<Regex>) {
    static CUES: OnceLock<(Vec<Regex>, Vec<Regex>)> = OnceLock::new();
    CUES.get_or_init(|| {
        (
            AFFIRMATIVE_CUES.iter().map(|c| cue_pattern(c)).collect(),
            NEGATIVE_CUES.iter().map(|c| cue_pattern(c)).collect(),
        )
    })
}

/// Decision parser with a configured default for unparseable text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoder {
    /// Applied when neither parser finds a signal. `NoMatch` is conservative
    /// for precision and is the default.
    pub default_decision: Decision,
}

impl Default for Decoder {
    fn default() -> Self {
        Self {
            default_decision: Decision::NoMatch,
        }
    }
}

impl Decoder {
    pub fn new(default_decision: Decision) -> Self {
        Self { default_decision }
    }

    /// Forced-frame parse: the *last* case-insensitive `match ... yes|no`
    /// occurrence wins, because chain-of-thought text often quotes the
    /// template before the real answer. Falls through to the free parser when
    /// the template never appears.
    pub fn parse_forced(&self, text: &str) -> (Decision, ParseStatus) {
        if let Some(caps) = forced_pattern().captures_iter(text).last() {
            let decision = if caps[1].eq_ignore_ascii_case("yes") {
                Decision::Match
            } else {
                Decision::NoMatch
            };
            return (decision, ParseStatus::ForcedExact);
        }
        self.parse_free(text)
    }

    /// Free-frame parse: counts affirmative and negative cues in the final
    /// paragraph; a strict winner decides, anything else defaults.
    pub fn parse_free(&self, text: &str) -> (Decision, ParseStatus) {
        let paragraph = text
            .rsplit("\n\n")
            .map(str::trim)
            .find(|p| !p.is_empty())
            .unwrap_or("");
        let (affirmative, negative) = cue_patterns();
        let yes: usize = affirmative
            .iter()
            .map(|re| re.find_iter(paragraph).count())
            .sum();
        let no: usize = negative
            .iter()
            .map(|re| re.find_iter(paragraph).count())
            .sum();
        if yes > no {
            (Decision::Match, ParseStatus::FreeInferred)
        } else if no > yes {
            (Decision::NoMatch, ParseStatus::FreeInferred)
        } else {
            (self.default_decision, ParseStatus::UnparseableDefaulted)
        }
    }

    /// Parses the final turn of a transcript under the given response frame.
    pub fn decide(&self, transcript: &Transcript, frame: ResponseFrame) -> MatchPrediction {
        let text = transcript.final_turn().completion.text.as_str();
        let (decision, parse_status) = match frame {
            ResponseFrame::Forced => self.parse_forced(text),
            ResponseFrame::Free => self.parse_free(text),
        };
        MatchPrediction {
            pair_id: transcript.pair_id.clone(),
            decision,
            parse_status,
            evidence: text.to_string(),
        }
    }
}
