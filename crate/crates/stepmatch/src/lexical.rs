//! Deterministic token-level comparison of two records.
//!
//! This is the local, non-LLM analogue of the first reasoning step and the
//! source of prompt hints: which tokens the two sides share, which are
//! one-sided, and which contiguous phrases occur in both.
//!
//! Tokens come from attribute *values* only; attribute names are excluded
//! because they are identical on both sides by construction and would drown
//! out the signal. Multiset semantics are used throughout: a model number
//! repeated twice on one side and once on the other matches once.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::records::EntityRecord;

/// A multiset of tokens, keyed by token with its multiplicity.
pub type TokenMultiset = BTreeMap<String, usize>;

/// The three-way split of two records' token multisets.
///
/// Conservation laws: `matched + only_left` equals the left token multiset
/// and `matched + only_right` equals the right one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDiff {
    pub matched: TokenMultiset,
    pub only_left: TokenMultiset,
    pub only_right: TokenMultiset,
}

impl TokenDiff {
    /// Matched tokens without multiplicities, in lexicographic order.
    pub fn matched_tokens(&self) -> Vec<&str> {
        self.matched.keys().map(|k| k.as_str()).collect()
    }

    /// Total number of matched token occurrences.
    pub fn matched_count(&self) -> usize {
        self.matched.values().sum()
    }
}

/// Splits `text` into lowercased tokens on whitespace and punctuation
/// boundaries. Empty tokens are dropped, so "WH-1000" becomes
/// `["wh", "1000"]`.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

/// All value tokens of a record, concatenated per attribute in the record's
/// (alphabetical) attribute order.
pub fn record_tokens(record: &EntityRecord) -> Vec<String> {
    record
        .entries()
        .flat_map(|(_, value)| tokenize(value.unwrap_or("")))
        .collect()
}

/// Per-attribute token runs of a record, in attribute order. Used where a
/// phrase must not cross an attribute boundary.
pub fn record_token_runs(record: &EntityRecord) -> Vec<Vec<String>> {
    record
        .entries()
        .map(|(_, value)| tokenize(value.unwrap_or("")))
        .collect()
}

fn count_tokens(tokens: &[String]) -> TokenMultiset {
    let mut counts = TokenMultiset::new();
    for token in tokens {
        *counts.entry(token.clone()).or_insert(0) += 1;
    }
    counts
}

/// Multiset intersection and differences of the two records' value tokens.
pub fn token_diff(left: &EntityRecord, right: &EntityRecord) -> TokenDiff {
    let left_counts = count_tokens(&record_tokens(left));
    let right_counts = count_tokens(&record_tokens(right));

    let mut matched = TokenMultiset::new();
    let mut only_left = TokenMultiset::new();
    let mut only_right = right_counts.clone();

    for (token, &n_left) in &left_counts {
        let n_right = right_counts.get(token).copied().unwrap_or(0);
        let shared = n_left.min(n_right);
        if shared > 0 {
            matched.insert(token.clone(), shared);
        }
        if n_left > shared {
            only_left.insert(token.clone(), n_left - shared);
        }
        match n_right - shared {
            0 => {
                only_right.remove(token);
            }
            rest => {
                only_right.insert(token.clone(), rest);
            }
        }
    }
    TokenDiff {
        matched,
        only_left,
        only_right,
    }
}

/// Jaccard similarity over the two records' token *sets* (multiplicities
/// ignored). 1.0 for two empty records.
pub fn jaccard(left: &EntityRecord, right: &EntityRecord) -> f64 {
    let a: std::collections::BTreeSet<String> = record_tokens(left).into_iter().collect();
    let b: std::collections::BTreeSet<String> = record_tokens(right).into_iter().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(&b).count();
    let union = a.union(&b).count();
    inter as f64 / union as f64
}

/// A contiguous run of tokens occurring in both records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonPhrase {
    pub tokens: Vec<String>,
    /// Index of the phrase's first occurrence in the left token sequence
    /// (counting across attribute runs).
    pub left_position: usize,
}

impl CommonPhrase {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

// Sentinel-separated token sequence: boundaries between attribute runs get
// unique ids so no phrase can span two attributes or match across sides.
#[derive(Debug, Clone, PartialEq, Eq)]
enum SeqToken {
    Word(String),
    Boundary(u32),
}

fn flatten_runs(runs: &[Vec<String>], side: u32) -> Vec<SeqToken> {
    let mut seq = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        if i > 0 {
            seq.push(SeqToken::Boundary(side * 1_000_000 + i as u32));
        }
        seq.extend(run.iter().cloned().map(SeqToken::Word));
    }
    seq
}

/// Maximal contiguous token subsequences of length at least `min_tokens` that
/// occur in both records' value-token sequences. "Maximal" means not contained
/// in any longer common phrase. Sorted longest-first, ties broken by the
/// phrase's first position on the left side.
pub fn common_phrases(
    left: &EntityRecord,
    right: &EntityRecord,
    min_tokens: usize,
) -> Vec<CommonPhrase> {
    assert!(min_tokens >= 1, "min_tokens must be at least 1");
    let left_seq = flatten_runs(&record_token_runs(left), 1);
    let right_seq = flatten_runs(&record_token_runs(right), 2);
    let n = left_seq.len();
    let m = right_seq.len();
    if n == 0 || m == 0 {
        return Vec::new();
    }

    // lcs[i][j] = length of the longest common run ending at left[i], right[j].
    let mut lcs = vec![vec![0usize; m + 1]; n + 1];
    // Word index of each sequence position, skipping boundary sentinels.
    let word_index: Vec<usize> = left_seq
        .iter()
        .scan(0usize, |words, t| {
            let here = *words;
            if matches!(t, SeqToken::Word(_)) {
                *words += 1;
            }
            Some(here)
        })
        .collect();
    // (phrase tokens) -> first left position, over occurrence-maximal runs.
    let mut found: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for i in 0..n {
        for j in 0..m {
            if left_seq[i] == right_seq[j] {
                lcs[i + 1][j + 1] = lcs[i][j] + 1;
            }
        }
    }
    for i in 0..n {
        for j in 0..m {
            let len = lcs[i + 1][j + 1];
            if len == 0 {
                continue;
            }
            // Occurrence-maximal: the run cannot be extended to the right.
            let extends = i + 1 < n && j + 1 < m && lcs[i + 2][j + 2] == len + 1;
            if extends {
                continue;
            }
            let start = i + 1 - len;
            let tokens: Vec<String> = left_seq[start..=i]
                .iter()
                .map(|t| match t {
                    SeqToken::Word(w) => w.clone(),
                    SeqToken::Boundary(_) => unreachable!("boundaries never match"),
                })
                .collect();
            let pos = word_index[start];
            let entry = found.entry(tokens).or_insert(pos);
            *entry = (*entry).min(pos);
        }
    }

    // Keep only phrases not contained in a longer found phrase.
    let phrases: Vec<(Vec<String>, usize)> = found.into_iter().collect();
    let mut kept: Vec<CommonPhrase> = Vec::new();
    'outer: for (tokens, pos) in &phrases {
        if tokens.len() < min_tokens {
            continue;
        }
        for (other, _) in &phrases {
            if other.len() > tokens.len() && contains_subsequence(other, tokens) {
                continue 'outer;
            }
        }
        kept.push(CommonPhrase {
            tokens: tokens.clone(),
            left_position: *pos,
        });
    }
    kept.sort_by(|a, b| {
        b.tokens
            .len()
            .cmp(&a.tokens.len())
            .then(a.left_position.cmp(&b.left_position))
            .then(a.tokens.cmp(&b.tokens))
    });
    kept
}

/// True if `needle` occurs contiguously inside `haystack`.
pub fn contains_subsequence<T: PartialEq>(haystack: &[T], needle: &[T]) -> bool {
    if needle.is_empty() {
        return true;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}
