//! End-to-end acceptance suite.
//!
//! Each test covers one numbered criterion and prints a `PASS` line; run with
//! `cargo test --test acceptance -- --nocapture` to see them. The live
//! spot-check (criterion 10) needs network access and an API key and is
//! ignored by default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use stepmatch::config::{BackendKind, RunConfig};
use stepmatch::datasets::{benchmarks, load_bundle, sample_few_shot, DatasetFormat, Split};
use stepmatch::decoding::{Decision, Decoder, ParseStatus};
use stepmatch::gateway::{FixtureBackend, Gateway, HeuristicBackend};
use stepmatch::lexical::{record_tokens, token_diff, TokenMultiset};
use stepmatch::metrics::{confusion, prf};
use stepmatch::prompts::{
    PromptRenderer, PromptVariant, RenderOptions, ResponseFrame, StepId, TemplateSet,
};
use stepmatch::records::{AttributeSchema, EntityRecord, GoldLabel, RecordPair};
use stepmatch::runner::{cmd_run, RunOutcome};
use stepmatch::strategies::{script_strategy, StrategyKind, StrategyRunner, Transcript};

fn toy10_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy10")
}

fn toy10_config(output_dir: &Path) -> RunConfig {
    let mut config = RunConfig::default();
    config.dataset.path = toy10_dir();
    config.dataset.format = DatasetFormat::Deepmatcher;
    config.dataset.split = Split::Test;
    config.dataset.domain = Some("product".to_string());
    config.run.output_dir = output_dir.to_path_buf();
    config.run.seed = 7;
    config
}

fn toy10_renderer(config: &RunConfig) -> PromptRenderer {
    let bundle = load_bundle(&config.dataset.path, config.dataset.format).unwrap();
    PromptRenderer::new(
        TemplateSet::builtin(),
        bundle.schema.clone(),
        "product",
        RenderOptions {
            style: config.prompts.style,
            hint_min_phrase_tokens: config.prompts.hint_min_phrase_tokens,
        },
    )
}

/// Scripts fixture responses for every test-split pair of toy10 under the
/// given per-pair response function, and points the config at the file.
fn script_toy10_fixture(
    config: &mut RunConfig,
    respond: &mut dyn FnMut(StepId, &RecordPair) -> String,
) {
    let bundle = load_bundle(&config.dataset.path, config.dataset.format).unwrap();
    let renderer = toy10_renderer(config);
    let params = config.backend.completion_params();
    let shots = sample_few_shot(&bundle, config.variant.shots, config.run.seed).unwrap();
    let mut entries = std::collections::HashMap::new();
    for pair in bundle.split(config.dataset.split).unwrap() {
        let scripted = script_strategy(
            &renderer,
            &params,
            config.run.strategy,
            pair,
            &config.variant,
            &shots,
            respond,
        )
        .unwrap();
        entries.extend(scripted);
    }
    let path = config.run.output_dir.join("fixture_responses.json");
    std::fs::create_dir_all(&config.run.output_dir).unwrap();
    FixtureBackend::write_file(&entries, &path).unwrap();
    config.backend.kind = BackendKind::Fixture;
    config.backend.fixture_path = Some(path);
}

fn random_record(rng: &mut ChaCha8Rng, id: &str) -> EntityRecord {
    const VOCAB: [&str; 14] = [
        "canon", "eos", "5d", "body", "kit", "sony", "alpha", "wh", "1000", "lens", "black", "pro",
        "mark", "ii",
    ];
    let mut record = EntityRecord::new(id);
    for attr in ["title", "description"] {
        let n = rng.gen_range(0..8);
        let words: Vec<&str> = (0..n).map(|_| *VOCAB.choose(rng).unwrap()).collect();
        record.set_value(attr, Some(words.join(" ")));
    }
    record
}

fn random_pair(rng: &mut ChaCha8Rng, id: usize) -> RecordPair {
    RecordPair::new(
        format!("r{id:04}"),
        random_record(rng, "l"),
        random_record(rng, "r"),
        Some(if rng.gen_bool(0.3) {
            GoldLabel::MATCH
        } else {
            GoldLabel::NO_MATCH
        }),
    )
}

// ---------------------------------------------------------------------------
// 1. Offline end-to-end exactness
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_offline_end_to_end_exactness() {
    let started = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut config = toy10_config(&tmp.path().join("run"));

    // Scripted decisions: 2 TP (a0, a1), 1 FN (a2), 1 FP (a3), 6 TN.
    let yes: &[&str] = &["test:a0|b0", "test:a1|b1", "test:a3|b3"];
    script_toy10_fixture(&mut config, &mut |_, pair| {
        if yes.contains(&pair.pair_id.as_str()) {
            "Match: Yes".to_string()
        } else {
            "Match: No".to_string()
        }
    });

    let outcome = cmd_run(&config).unwrap();
    let report = &outcome.report;
    assert_eq!(outcome.n_errors, 0);
    assert_eq!(report.n_pairs, 10);
    assert_eq!(
        (
            report.counts.true_pos,
            report.counts.false_pos,
            report.counts.false_neg,
            report.counts.true_neg
        ),
        (2, 1, 1, 6)
    );
    assert_eq!(report.precision, 2.0 / 3.0);
    assert_eq!(report.recall, 2.0 / 3.0);
    assert_eq!(report.f1, 2.0 / 3.0);
    assert_eq!(report.unparseable_rate, 0.0);

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "[acceptance] criterion 1 (offline end-to-end exactness: P=R=F1=2/3 on the 10-pair \
         fixture, {elapsed:?}): PASS"
    );
}

// ---------------------------------------------------------------------------
// 2. Strategy shape
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_strategy_shapes() {
    let started = Instant::now();
    let schema = AttributeSchema::new("rand", vec!["description".into(), "title".into()]).unwrap();
    let renderer = PromptRenderer::new(
        TemplateSet::builtin(),
        schema,
        "product",
        RenderOptions::default(),
    );
    let gateway = Arc::new(Gateway::builder(Box::new(HeuristicBackend::new())).build());
    let runner = StrategyRunner::new(renderer, gateway);
    let variant = PromptVariant::default();

    let expected_turns: [(StrategyKind, usize); 4] = [
        (StrategyKind::Baseline, 1),
        (StrategyKind::CotSingle, 1),
        (StrategyKind::CotMulti, 3),
        (StrategyKind::Debate, 3),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        let pair = random_pair(&mut rng, i);
        for (kind, n_turns) in expected_turns {
            let transcript = runner.run(kind, &pair, &variant, &[]).unwrap();
            assert_eq!(transcript.turns.len(), n_turns, "{kind} on pair {i}");
            let steps: Vec<StepId> = transcript.turns.iter().map(|t| t.step).collect();
            assert_eq!(steps, kind.step_sequence(), "{kind} step order");

            // Verbatim chain embedding. The chain strategy threads every
            // earlier response into each later prompt; the debate keeps pro
            // and con independent by design and embeds both into synthesis.
            match kind {
                StrategyKind::CotMulti => {
                    for k in 1..transcript.turns.len() {
                        let prompt = transcript.turns[k]
                            .request
                            .messages
                            .last_user_content()
                            .unwrap();
                        for earlier in &transcript.turns[..k] {
                            assert!(
                                prompt.contains(&earlier.completion.text),
                                "{kind} turn {k} must embed {} response",
                                earlier.step
                            );
                        }
                    }
                }
                StrategyKind::Debate => {
                    let synthesis = transcript.turns[2]
                        .request
                        .messages
                        .last_user_content()
                        .unwrap();
                    for earlier in &transcript.turns[..2] {
                        assert!(synthesis.contains(&earlier.completion.text));
                    }
                }
                _ => {}
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "[acceptance] criterion 2 (strategy shapes 1/1/3/3 + verbatim chain embedding over 200 \
         random pairs, {elapsed:?}): PASS"
    );
}

// ---------------------------------------------------------------------------
// 3. Metric oracle equivalence
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_metric_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let n = rng.gen_range(0..=50);
        let mut predictions = Vec::with_capacity(n);
        let mut golds = Vec::with_capacity(n);
        for i in 0..n {
            predictions.push(stepmatch::decoding::MatchPrediction {
                pair_id: format!("p{i}"),
                decision: if rng.gen_bool(0.5) {
                    Decision::Match
                } else {
                    Decision::NoMatch
                },
                parse_status: ParseStatus::ForcedExact,
                evidence: String::new(),
            });
            golds.push((
                format!("p{i}"),
                if rng.gen_bool(0.4) {
                    GoldLabel::MATCH
                } else {
                    GoldLabel::NO_MATCH
                },
            ));
        }

        // Independent recount, id-by-id.
        let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
        for (id, gold) in &golds {
            let p = predictions.iter().find(|p| &p.pair_id == id).unwrap();
            match (p.decision.is_match(), gold.is_match()) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        let counts = confusion(&predictions, &golds).unwrap();
        assert_eq!(
            (
                counts.true_pos,
                counts.false_pos,
                counts.true_neg,
                counts.false_neg
            ),
            (tp, fp, tn, fn_)
        );

        let scores = prf(&counts);
        if tp > 0 {
            let precision = tp as f64 / (tp + fp) as f64;
            let recall = tp as f64 / (tp + fn_) as f64;
            let f1 = 2.0 * precision * recall / (precision + recall);
            assert_eq!(scores.precision, precision);
            assert_eq!(scores.recall, recall);
            assert_eq!(scores.f1, f1);
        } else {
            assert_eq!(
                (scores.precision, scores.recall, scores.f1),
                (0.0, 0.0, 0.0)
            );
            assert_eq!(scores.degenerate, fp == 0 && fn_ == 0);
        }
    }
    println!(
        "[acceptance] criterion 3 (metrics equal brute-force recount on 1000 random instances, \
         exact): PASS"
    );
}

// ---------------------------------------------------------------------------
// 4. Lexical oracle equivalence
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_lexical_oracle_equivalence() {
    fn count(tokens: &[String]) -> TokenMultiset {
        let mut m = TokenMultiset::new();
        for t in tokens {
            *m.entry(t.clone()).or_insert(0) += 1;
        }
        m
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..1000 {
        let left = random_record(&mut rng, "l");
        let right = random_record(&mut rng, "r");
        let diff = token_diff(&left, &right);

        // Brute-force oracle: per-token frequency minima.
        let lt = record_tokens(&left);
        let rt = record_tokens(&right);
        let mut vocab: Vec<String> = lt.iter().chain(rt.iter()).cloned().collect();
        vocab.sort();
        vocab.dedup();
        let mut matched = TokenMultiset::new();
        let mut only_left = TokenMultiset::new();
        let mut only_right = TokenMultiset::new();
        for token in vocab {
            let nl = lt.iter().filter(|t| **t == token).count();
            let nr = rt.iter().filter(|t| **t == token).count();
            let shared = nl.min(nr);
            if shared > 0 {
                matched.insert(token.clone(), shared);
            }
            if nl > shared {
                only_left.insert(token.clone(), nl - shared);
            }
            if nr > shared {
                only_right.insert(token.clone(), nr - shared);
            }
        }
        assert_eq!(diff.matched, matched, "pair {i}");
        assert_eq!(diff.only_left, only_left, "pair {i}");
        assert_eq!(diff.only_right, only_right, "pair {i}");

        // Conservation: matched + only_left == tokens(left), same right.
        let mut rebuilt_left = diff.matched.clone();
        for (t, n) in &diff.only_left {
            *rebuilt_left.entry(t.clone()).or_insert(0) += n;
        }
        assert_eq!(rebuilt_left, count(&lt), "pair {i} left conservation");
        let mut rebuilt_right = diff.matched.clone();
        for (t, n) in &diff.only_right {
            *rebuilt_right.entry(t.clone()).or_insert(0) += n;
        }
        assert_eq!(rebuilt_right, count(&rt), "pair {i} right conservation");
    }
    println!(
        "[acceptance] criterion 4 (token diff equals multiset oracle on 1000 random pairs + \
         conservation invariants, exact): PASS"
    );
}

// ---------------------------------------------------------------------------
// 5. Parser suite
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_parser_suite() {
    let decoder = Decoder::default();
    let scaffold = TemplateSet::builtin().scaffold;

    // Every forced-frame template exemplar parses to its intended decision.
    assert_eq!(
        decoder.parse_forced(&scaffold.forced_yes),
        (Decision::Match, ParseStatus::ForcedExact)
    );
    assert_eq!(
        decoder.parse_forced(&scaffold.forced_no),
        (Decision::NoMatch, ParseStatus::ForcedExact)
    );
    // Free-frame exemplars parse under the free parser.
    assert_eq!(
        decoder.parse_free(&scaffold.free_yes),
        (Decision::Match, ParseStatus::FreeInferred)
    );
    assert_eq!(
        decoder.parse_free(&scaffold.free_no),
        (Decision::NoMatch, ParseStatus::FreeInferred)
    );

    use Decision::{Match as M, NoMatch as N};
    use ParseStatus::{ForcedExact as FE, FreeInferred as FI, UnparseableDefaulted as UD};

    // Adversarial corpus; every case documents its expected status.
    let forced_cases: [(&str, Decision, ParseStatus); 30] = [
        ("Match: Yes", M, FE),
        ("Match: No", N, FE),
        ("match: yes", M, FE),
        ("MATCH: NO", N, FE),
        ("Match:Yes", M, FE),
        ("Match - No", N, FE),
        ("Match = Yes", M, FE),
        ("match   no", N, FE),
        ("The verdict is Match: Yes.", M, FE),
        ("reasoning...\nMatch: Yes", M, FE),
        ("Match: Yes\nwait, actually\nMatch: No", N, FE),
        ("Match: No ... Match: Yes", M, FE),
        (
            "I will answer \"Match: Yes/No\" as asked.\nMatch: No",
            N,
            FE,
        ),
        ("Step 3 says Match: yes", M, FE),
        ("  Match:   YES  ", M, FE),
        ("Match:\nYes", M, FE),
        ("(Match: No)", N, FE),
        ("'Match: Yes'", M, FE),
        ("Final answer: Match: No.", N, FE),
        ("They match: yes they do", M, FE),
        // No template hit: falls through to the free parser.
        ("These describe the same entity.", M, FI),
        ("They are different products.", N, FI),
        ("mismatch yesterday", N, UD),
        ("It matches nothing here", N, UD),
        ("", N, UD),
        ("   \n\n  ", N, UD),
        // two negative cues ("no", "different") beat one affirmative
        ("no signal either way, same entity or different", N, FI),
        ("Yes.", M, FI),
        ("No.", N, FI),
        ("The records refer to the same real-world entity.", M, FI),
    ];
    for (text, decision, status) in forced_cases {
        assert_eq!(
            decoder.parse_forced(text),
            (decision, status),
            "forced parse of {text:?}"
        );
    }

    let free_cases: [(&str, Decision, ParseStatus); 20] = [
        ("These records refer to the same real-world entity.", M, FI),
        ("Both rows describe the same entity.", M, FI),
        ("They are different products.", N, FI),
        ("These are not the same item.", N, FI),
        ("yes", M, FI),
        ("no", N, FI),
        ("YES, same entity.", M, FI),
        ("Clearly different brands and different models.", N, FI),
        ("different yet the same entity somehow", N, UD),
        ("", N, UD),
        ("inconclusive analysis", N, UD),
        ("maybe", N, UD),
        (
            "The first paragraph says different.\n\nBut finally: same entity.",
            M,
            FI,
        ),
        ("same entity\n\ntotally different", N, FI),
        ("notes say nothing useful", N, UD),
        ("yes yes yes but no", M, FI),
        ("no no but yes", N, FI),
        ("they refer to the same manufacturer listing", M, FI),
        ("not the same", N, FI),
        ("unknown", N, UD),
    ];
    let mut checked = 0;
    for (text, decision, status) in free_cases {
        let (got_decision, got_status) = decoder.parse_free(text);
        // Cases marked UD must default; the default decision is NoMatch here.
        assert_eq!(got_status, status, "free status of {text:?}");
        assert_eq!(got_decision, decision, "free decision of {text:?}");
        checked += 1;
    }
    assert_eq!(checked + 30, 50);

    // Unparseable responses surface as a reported rate, never silently.
    let tmp = tempfile::tempdir().unwrap();
    let mut config = toy10_config(&tmp.path().join("run"));
    let garbage: &[&str] = &["test:a4|b4", "test:a5|b5"];
    script_toy10_fixture(&mut config, &mut |_, pair| {
        if garbage.contains(&pair.pair_id.as_str()) {
            "inconclusive rambling with zero usable cues".to_string()
        } else {
            "Match: No".to_string()
        }
    });
    let outcome = cmd_run(&config).unwrap();
    assert_eq!(outcome.report.unparseable_rate, 0.2);

    println!(
        "[acceptance] criterion 5 (template exemplars 100% + 50-case adversarial corpus + \
         unparseable rate reported): PASS"
    );
}

// ---------------------------------------------------------------------------
// 6. Cache & concurrency determinism
// ---------------------------------------------------------------------------

fn artifact_bytes(outcome: &RunOutcome) -> Vec<(String, Vec<u8>)> {
    ["report.json", "transcripts.jsonl", "predictions.jsonl"]
        .iter()
        .map(|name| {
            (
                name.to_string(),
                std::fs::read(outcome.output_dir.join(name)).unwrap(),
            )
        })
        .collect()
}

#[test]
fn criterion_6_cache_and_concurrency_determinism() {
    let tmp = tempfile::tempdir().unwrap();

    let mut serial = toy10_config(&tmp.path().join("serial"));
    serial.run.strategy = StrategyKind::CotMulti;
    serial.backend.parallelism = 1;
    let serial_outcome = cmd_run(&serial).unwrap();

    let mut parallel = toy10_config(&tmp.path().join("parallel"));
    parallel.run.strategy = StrategyKind::CotMulti;
    parallel.backend.parallelism = 8;
    let parallel_outcome = cmd_run(&parallel).unwrap();

    assert_eq!(
        artifact_bytes(&serial_outcome),
        artifact_bytes(&parallel_outcome),
        "parallelism must not change any artifact byte"
    );
    assert!(serial_outcome.backend_calls > 0);

    // Second run over the warm cache: identical bytes, zero backend calls.
    let rerun_outcome = cmd_run(&parallel).unwrap();
    assert_eq!(rerun_outcome.backend_calls, 0);
    assert_eq!(
        artifact_bytes(&parallel_outcome),
        artifact_bytes(&rerun_outcome)
    );

    println!(
        "[acceptance] criterion 6 (parallelism 1 vs 8 byte-identical; cached rerun issues zero \
         backend calls): PASS"
    );
}

// ---------------------------------------------------------------------------
// 7. Token accounting exactness
// ---------------------------------------------------------------------------

fn read_transcripts(outcome: &RunOutcome) -> Vec<Transcript> {
    std::fs::read_to_string(outcome.output_dir.join("transcripts.jsonl"))
        .unwrap()
        .lines()
        .map(|line| serde_json::from_str(line).unwrap())
        .collect()
}

#[test]
fn criterion_7_token_accounting_exactness() {
    let tmp = tempfile::tempdir().unwrap();

    let mut baseline = toy10_config(&tmp.path().join("baseline"));
    baseline.run.strategy = StrategyKind::Baseline;
    let baseline_outcome = cmd_run(&baseline).unwrap();

    let mut chain = toy10_config(&tmp.path().join("chain"));
    chain.run.strategy = StrategyKind::CotMulti;
    let chain_outcome = cmd_run(&chain).unwrap();

    // Recompute the mock token rule from the raw transcripts and demand
    // exact integer agreement with the report totals.
    for outcome in [&baseline_outcome, &chain_outcome] {
        let transcripts = read_transcripts(outcome);
        let mut input = 0u64;
        let mut output = 0u64;
        for transcript in &transcripts {
            for turn in &transcript.turns {
                input += turn
                    .request
                    .messages
                    .messages()
                    .iter()
                    .map(|m| m.content.split_whitespace().count() as u64)
                    .sum::<u64>();
                output += turn.completion.text.split_whitespace().count() as u64;
            }
        }
        assert_eq!(outcome.report.token_total.input_tokens, input);
        assert_eq!(outcome.report.token_total.output_tokens, output);
        let mean = (input + output) as f64 / transcripts.len() as f64;
        assert_eq!(outcome.report.token_mean_per_pair, mean);
    }

    // The three-prompt chain costs strictly more than the single prompt on
    // the same pairs, matching the qualitative cost ordering.
    assert!(
        chain_outcome.report.token_mean_per_pair > baseline_outcome.report.token_mean_per_pair,
        "chain {} vs baseline {}",
        chain_outcome.report.token_mean_per_pair,
        baseline_outcome.report.token_mean_per_pair
    );

    println!(
        "[acceptance] criterion 7 (report totals equal the mock token rule exactly; chain mean {} \
         > baseline mean {}): PASS",
        chain_outcome.report.token_mean_per_pair, baseline_outcome.report.token_mean_per_pair
    );
}

// ---------------------------------------------------------------------------
// 8. Dataset ingestion at benchmark scale
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_dataset_ingestion_statistics() {
    let started = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut seen = BTreeMap::new();
    for spec in &benchmarks::CATALOG {
        let dir = spec.materialize(tmp.path()).unwrap();
        let bundle = load_bundle(&dir, spec.format).unwrap();
        let stats = bundle.combined_stats();
        assert_eq!(
            (stats.n_positive, stats.n_negative, stats.n_attributes),
            (spec.positives, spec.negatives, spec.attributes.len()),
            "{} statistics",
            spec.id
        );
        seen.insert(
            spec.id,
            (stats.n_positive, stats.n_negative, stats.n_attributes),
        );
    }
    // Spot-pin the published numbers for two of the six.
    assert_eq!(seen["DS"], (5_347, 23_360, 4));
    assert_eq!(seen["AB"], (1_028, 8_547, 3));

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "[acceptance] criterion 8 (six benchmarks load with exact catalog statistics, \
         {elapsed:?}): PASS"
    );
}

// ---------------------------------------------------------------------------
// 9. Few-shot protocol
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_few_shot_protocol() {
    let tmp = tempfile::tempdir().unwrap();
    let scaffold = TemplateSet::builtin().scaffold;
    let answer_yes = format!("{}{}", scaffold.example_answer_prefix, scaffold.forced_yes);
    let answer_no = format!("{}{}", scaffold.example_answer_prefix, scaffold.forced_no);

    for kind in StrategyKind::ALL {
        for shots in [0usize, 2] {
            let mut config = toy10_config(&tmp.path().join(format!("{kind}-k{shots}")));
            config.run.strategy = kind;
            config.variant.shots = shots;
            let outcome = cmd_run(&config).unwrap();
            assert_eq!(outcome.n_errors, 0);
            for transcript in read_transcripts(&outcome) {
                for turn in &transcript.turns {
                    let prompt = turn.request.messages.last_user_content().unwrap();
                    let n_answers = prompt
                        .matches(scaffold.example_answer_prefix.as_str())
                        .count();
                    if shots == 2 && turn.step.is_decision_bearing() {
                        assert_eq!(n_answers, 2, "{kind} {} exemplar count", turn.step);
                        assert_eq!(prompt.matches(answer_yes.as_str()).count(), 1);
                        assert_eq!(prompt.matches(answer_no.as_str()).count(), 1);
                    } else {
                        assert_eq!(n_answers, 0, "{kind} {} must carry no exemplars", turn.step);
                        assert!(!prompt.contains(scaffold.examples_header.as_str()));
                    }
                }
            }
        }
    }
    println!(
        "[acceptance] criterion 9 (k=2 places exactly 1 positive + 1 negative exemplar in every \
         decision-bearing prompt; k=0 places none): PASS"
    );
}

// ---------------------------------------------------------------------------
// 10. Optional live spot-check
// ---------------------------------------------------------------------------

/// Network spot-check, ignored by default. Opt in with:
/// `OPENAI_API_KEY=... cargo test --test acceptance -- --ignored --nocapture`.
/// Uses the real dataset when `STEPMATCH_LIVE_DATA` points at a two-table
/// benchmark directory; otherwise runs on the synthesized citation stand-in.
/// Non-deterministic by nature: the model, not the harness, decides.
#[test]
#[ignore = "issues paid network calls; opt in explicitly"]
fn criterion_10_live_spot_check() {
    if std::env::var("OPENAI_API_KEY").is_err() {
        println!("[acceptance] criterion 10 (live spot-check): SKIP - OPENAI_API_KEY not set");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = match std::env::var("STEPMATCH_LIVE_DATA") {
        Ok(dir) => PathBuf::from(dir),
        Err(_) => benchmarks::find("DA")
            .unwrap()
            .materialize(tmp.path())
            .unwrap(),
    };

    let mut config = RunConfig::default();
    config.dataset.path = data_dir;
    config.dataset.format = DatasetFormat::Deepmatcher;
    config.dataset.id = Some("DA".to_string());
    config.run.output_dir = tmp.path().join("live");
    config.run.sample = Some(200);
    config.run.strategy = StrategyKind::Baseline;
    config.variant.response_frame = ResponseFrame::Forced;
    config.backend.kind = BackendKind::Network;
    config.backend.live = true;
    config.backend.parallelism = 4;
    config.backend.rate_limit_requests = Some(60);

    // Print the expected cost before issuing a single call.
    let bundle = load_bundle(&config.dataset.path, config.dataset.format).unwrap();
    let renderer = PromptRenderer::new(
        TemplateSet::builtin(),
        bundle.schema.clone(),
        "citation",
        RenderOptions::default(),
    );
    let pairs = bundle.split(Split::Test).unwrap();
    let sample_size = 200.min(pairs.len());
    let est_input: u64 = pairs
        .iter()
        .take(sample_size)
        .map(|p| {
            renderer
                .render_baseline(p, &config.variant, &[])
                .unwrap()
                .whitespace_tokens()
        })
        .sum();
    println!(
        "[acceptance] criterion 10: about to issue {sample_size} live requests to {} \
         (~{est_input} prompt words + completions); token costs apply",
        config.backend.model
    );

    let outcome = cmd_run(&config).unwrap();
    println!(
        "[acceptance] criterion 10: live F1 {:.3} over {} pairs ({} errors)",
        outcome.report.f1, outcome.report.n_pairs, outcome.n_errors
    );
    assert!(
        outcome.report.f1 >= 0.85,
        "live zero-shot baseline F1 {:.3} below 0.85",
        outcome.report.f1
    );
    println!("[acceptance] criterion 10 (live spot-check F1 >= 0.85): PASS");
}
