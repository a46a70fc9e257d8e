//! Run all four matching strategies offline against the heuristic backend.
//!
//! Each strategy produces a transcript (every prompt and completion plus
//! token usage); the decoder then turns the final completion into a match
//! decision.
//!
//! ```bash
//! cargo run -p stepmatch --example run_strategies
//! ```

use std::sync::Arc;

use stepmatch::decoding::Decoder;
use stepmatch::gateway::{Gateway, HeuristicBackend};
use stepmatch::prompts::{PromptRenderer, PromptVariant, RenderOptions, TemplateSet};
use stepmatch::records::{AttributeSchema, EntityRecord, RecordPair};
use stepmatch::strategies::{StrategyKind, StrategyRunner};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = AttributeSchema::new("shop", vec!["title".into(), "price".into()])?;
    let pair = RecordPair::new(
        "demo",
        EntityRecord::new("a")
            .with_value("title", Some("Sony WH-1000XM3 wireless headphones"))
            .with_value("price", Some("299.99")),
        EntityRecord::new("b")
            .with_value("title", Some("Sony WH1000XM3 Wireless"))
            .with_value("price", Some("298.00")),
        None,
    );

    let renderer = PromptRenderer::new(
        TemplateSet::builtin(),
        schema,
        "product",
        RenderOptions::default(),
    );
    let gateway = Arc::new(Gateway::builder(Box::new(HeuristicBackend::new())).build());
    let runner = StrategyRunner::new(renderer, gateway);
    let variant = PromptVariant::default();
    let decoder = Decoder::default();

    for kind in StrategyKind::ALL {
        let transcript = runner.run(kind, &pair, &variant, &[])?;
        let prediction = decoder.decide(&transcript, variant.response_frame);
        println!("=== {kind} ===");
        for turn in &transcript.turns {
            println!(
                "  [{}] {} prompt tokens -> {} completion tokens",
                turn.step, turn.completion.usage.input_tokens, turn.completion.usage.output_tokens
            );
            println!("      reply: {}", turn.completion.text.replace('\n', " | "));
        }
        println!(
            "  decision: {:?} ({:?}), total usage {}+{} tokens\n",
            prediction.decision,
            prediction.parse_status,
            transcript.total_usage.input_tokens,
            transcript.total_usage.output_tokens
        );
    }
    Ok(())
}
