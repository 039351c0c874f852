//! Pronunciation lookup, phoneme-length features, and homophone-tolerant
//! matching from an ARPABET-style lexicon.
//!
//! Run with: cargo run --example phoneme_features

use std::io::Cursor;
use std::path::Path;

use lexinoise::lexicon::PronunciationLexicon;

const LEXICON: &str = "\
;;; comment lines and alternate pronunciations are supported
SEA S IY1
SEE S IY1
OCEAN OW1 SH AH0 N
TOMATO T AH0 M EY1 T OW2
TOMATO(2) T AH0 M AA1 T OW2
BIG B IH1 G
LARGE L AA1 R JH
ENORMOUS IH0 N AO1 R M AH0 S
";

fn main() {
    let lexicon =
        PronunciationLexicon::parse(Cursor::new(LEXICON), Path::new("<inline>")).unwrap();
    println!("{} words loaded", lexicon.len());

    for word in ["sea", "ocean", "big", "large", "enormous", "tomato"] {
        println!(
            "{word:>10}: {} phonemes, pronunciations {:?}",
            lexicon.phoneme_length(word).unwrap(),
            lexicon.pronunciations(word).unwrap()
        );
    }

    // Homophones match through their stress-stripped pronunciations.
    for (target, response) in [
        ("sea", "see"),
        ("sea", "Sea."),
        ("sea", "ocean"),
        ("notinlexicon", "notinlexicon"), // OOV falls back to string equality
    ] {
        println!(
            "match({target:?}, {response:?}) = {}",
            lexicon.phonetic_match(target, response)
        );
    }
}
