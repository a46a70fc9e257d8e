//! Record serialization styles and token-level comparison.
//!
//! Shows the two prompt serialization styles, the multiset token diff, the
//! common phrases shared by a pair, and the Jaccard similarity used by the
//! offline heuristic backend.
//!
//! ```bash
//! cargo run -p stepmatch --example serialize_and_diff
//! ```

use stepmatch::lexical::{common_phrases, jaccard, token_diff, tokenize};
use stepmatch::records::{serialize_record, AttributeSchema, EntityRecord, SerializationStyle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = AttributeSchema::new(
        "camera-shop",
        vec!["title".into(), "description".into(), "price".into()],
    )?;
    let left = EntityRecord::new("a1")
        .with_value("title", Some("Canon EOS 5D Mark II"))
        .with_value("description", Some("full-frame DSLR body, black"))
        .with_value("price", Some("1899.00"));
    let right = EntityRecord::new("b1")
        .with_value("title", Some("Canon EOS 5D Mark II body"))
        .with_value("description", Some("21.1MP full frame digital SLR"))
        .with_value("price", None);

    for style in [SerializationStyle::LabeledLines, SerializationStyle::ColVal] {
        println!("--- {style:?} ---");
        println!("{}\n", serialize_record(&left, &schema, style)?);
    }

    println!(
        "tokenize(\"Sony WH-1000XM3\") = {:?}\n",
        tokenize("Sony WH-1000XM3")
    );

    let diff = token_diff(&left, &right);
    println!("matched tokens:     {:?}", diff.matched_tokens());
    println!(
        "only in left:       {:?}",
        diff.only_left.keys().collect::<Vec<_>>()
    );
    println!(
        "only in right:      {:?}",
        diff.only_right.keys().collect::<Vec<_>>()
    );
    println!("jaccard similarity: {:.3}\n", jaccard(&left, &right));

    println!("common phrases (>= 2 tokens):");
    for phrase in common_phrases(&left, &right, 2) {
        println!(
            "  \"{}\" (left position {})",
            phrase.text(),
            phrase.left_position
        );
    }
    Ok(())
}
