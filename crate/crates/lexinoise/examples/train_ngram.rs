//! Train a Kneser-Ney trigram model, query contextual probabilities, and
//! round-trip it through the on-disk format.
//!
//! Run with: cargo run --example train_ngram

use lexinoise::ngram::{train_from_lines, NgramModel};

fn main() {
    let corpus = [
        "he dives into the sea",
        "she dives into the sea",
        "they swim in the ocean",
        "the ocean is deep",
        "the sea is calm today",
        "a storm over the sea",
        "waves roll across the ocean",
        "he dives into the water",
    ];
    let model = train_from_lines(&corpus, 3, 0.75).unwrap();
    println!(
        "trained order-{} model, {} event tokens",
        model.order(),
        model.event_tokens().count()
    );

    let ctx = |words: &[&str]| -> Vec<String> { words.iter().map(|w| w.to_string()).collect() };
    for (target, context) in [
        ("sea", ctx(&["dives", "into", "the"])),
        ("ocean", ctx(&["dives", "into", "the"])),
        ("water", ctx(&["dives", "into", "the"])),
        ("sea", ctx(&[])),
        ("submarine", ctx(&["into", "the"])), // unseen word -> <unk>
    ] {
        println!(
            "log P({target:>10} | {:?}) = {:+.4}",
            context,
            model.log_prob(target, &context)
        );
    }

    // Normalization check over the event vocabulary.
    let total: f64 = model
        .event_tokens()
        .map(|w| model.prob(w, &ctx(&["into", "the"])))
        .sum();
    println!("sum over event vocab: {total:.12}");

    let path = std::env::temp_dir().join("lexinoise_example.lm");
    model.save(&path).unwrap();
    let loaded = NgramModel::load(&path).unwrap();
    let a = model.log_prob("sea", &ctx(&["into", "the"]));
    let b = loaded.log_prob("sea", &ctx(&["into", "the"]));
    println!("round trip via {}: {a} == {b}", path.display());
    assert_eq!(a.to_bits(), b.to_bits());
}
