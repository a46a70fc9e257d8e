//! Render prompts across the design space.
//!
//! Walks the five design-space axes (task frame, verbiage, response frame,
//! shot count, hints) and prints rendered prompts for the single-prompt
//! strategies and each step of the chained ones.
//!
//! ```bash
//! cargo run -p stepmatch --example render_prompts
//! ```

use stepmatch::datasets::FewShotExample;
use stepmatch::prompts::{
    enumerate_variants, Hints, PromptRenderer, PromptVariant, RenderOptions, StepId, TaskFrame,
    TemplateSet,
};
use stepmatch::records::{AttributeSchema, EntityRecord, GoldLabel, RecordPair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = AttributeSchema::new("shop", vec!["title".into(), "price".into()])?;
    let pair = RecordPair::new(
        "demo",
        EntityRecord::new("a")
            .with_value("title", Some("Canon EOS 5D Mark II"))
            .with_value("price", Some("1899.00")),
        EntityRecord::new("b")
            .with_value("title", Some("Canon EOS 5D Mark II body"))
            .with_value("price", Some("1849.00")),
        None,
    );
    let shot = FewShotExample {
        pair: RecordPair::new(
            "exemplar",
            EntityRecord::new("x")
                .with_value("title", Some("Apple iPad 2 16GB"))
                .with_value("price", Some("399.00")),
            EntityRecord::new("y")
                .with_value("title", Some("Apple iPad 2 MC769LL/A 16 GB"))
                .with_value("price", Some("389.99")),
            Some(GoldLabel::MATCH),
        ),
        answer: GoldLabel::MATCH,
    };

    let renderer = PromptRenderer::new(
        TemplateSet::builtin(),
        schema,
        "product",
        RenderOptions::default(),
    );

    let variants = enumerate_variants(&[0, 2]);
    println!(
        "design space: {} variants over shots {{0, 2}}\n",
        variants.len()
    );

    // A hinted domain-specific baseline prompt with one exemplar.
    let variant = PromptVariant {
        task_frame: TaskFrame::DomainSpecific,
        shots: 1,
        hints: Hints::On,
        ..PromptVariant::default()
    };
    let messages = renderer.render_baseline(&pair, &variant, std::slice::from_ref(&shot))?;
    println!("=== baseline [{}] ===", variant.slug());
    println!("{}\n", messages.last_user_content().unwrap());

    // All three steps in one prompt.
    let zero_shot = PromptVariant::default();
    let messages = renderer.render_single_prompt_cot(&pair, &zero_shot, &[])?;
    println!("=== cot_single [{}] ===", zero_shot.slug());
    println!("{}\n", messages.last_user_content().unwrap());

    // The three-prompt chain, feeding mock responses forward.
    let step1 = renderer.render_step(StepId::Step1Tokens, &pair, &[], &zero_shot, &[])?;
    println!("=== cot_multi step 1 ===");
    println!("{}\n", step1.last_user_content().unwrap());

    let step1_response =
        "Matched tokens: canon, eos, 5d, mark, ii. Only in the second record: body.";
    let step2 = renderer.render_step(
        StepId::Step2Attributes,
        &pair,
        &[(StepId::Step1Tokens, step1_response.to_string())],
        &zero_shot,
        &[],
    )?;
    println!("=== cot_multi step 2 (embeds the step 1 response) ===");
    println!("{}\n", step2.last_user_content().unwrap());

    // Debate synthesis embedding both argument texts.
    let synthesis = renderer.render_debate(
        StepId::DebateSynthesis,
        &pair,
        Some("Nearly all tokens agree; the price difference is small."),
        Some("One record sells only the body; bundles differ."),
        &zero_shot,
        &[],
    )?;
    println!("=== debate synthesis ===");
    println!("{}", synthesis.last_user_content().unwrap());
    Ok(())
}
