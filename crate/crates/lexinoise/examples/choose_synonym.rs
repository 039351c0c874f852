//! End-to-end synonym choice: train a language model, build the feature
//! vectors for a pair in context, and pick the noise-robust member under a
//! per-condition model — with synthetic audio supplying the STOI features.
//!
//! Run with: cargo run --example choose_synonym

use std::f64::consts::PI;
use std::io::Cursor;
use std::path::Path;

use lexinoise::audio::{mix_at_snr, AudioSignal, NoiseCondition};
use lexinoise::lexicon::{PronunciationLexicon, SynonymPairRecord, TARGET_SLOT};
use lexinoise::ngram::train_from_lines;
use lexinoise::selector::{choose, ModelSet, WordAudio};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const LEXICON: &str = "\
SEA S IY1
OCEAN OW1 SH AH0 N
BIG B IH1 G
ENORMOUS IH0 N AO1 R M AH0 S
";

fn speech_like(rate: u32, secs: f64, seed: u64) -> AudioSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = (secs * rate as f64) as usize;
    let f0 = rng.gen_range(90.0..220.0);
    let mut samples = vec![0.0; len];
    for h in 1..=20 {
        let f = f0 * h as f64;
        if f > 4000.0 {
            break;
        }
        let phase = rng.gen_range(0.0..2.0 * PI);
        for (i, s) in samples.iter_mut().enumerate() {
            *s += (2.0 * PI * f * i as f64 / rate as f64 + phase).sin() / (h as f64).sqrt();
        }
    }
    for (i, s) in samples.iter_mut().enumerate() {
        let t = i as f64 / rate as f64;
        *s *= 0.55 + 0.45 * (2.0 * PI * 4.0 * t).sin();
    }
    let peak = samples.iter().fold(0f64, |p, s| p.max(s.abs()));
    for s in &mut samples {
        *s *= 0.5 / peak;
    }
    AudioSignal::new(samples, rate).unwrap()
}

/// Clean/degraded audio for one word at the given SNR (seed stands in for a
/// recording of that word).
fn word_audio(seed: u64, snr_db: f64) -> WordAudio {
    let rate = 10_000;
    let clean = speech_like(rate, 0.8, seed);
    let noise = speech_like(rate, 1.0, seed + 77);
    let condition = NoiseCondition::new(snr_db, "babble").unwrap();
    let degraded = mix_at_snr(&clean, &noise, &condition, 123).unwrap().signal;
    WordAudio {
        clean,
        degraded,
        span: None,
    }
}

fn main() {
    let lexicon =
        PronunciationLexicon::parse(Cursor::new(LEXICON), Path::new("<inline>")).unwrap();
    let lm = train_from_lines(
        &[
            "he dives into the sea",
            "she dives into the sea",
            "they swim in the ocean",
            "the ocean is big",
            "the sea is big",
            "an enormous wave in the sea",
        ],
        3,
        0.75,
    )
    .unwrap();
    let models = ModelSet::canonical();

    let pair = SynonymPairRecord::new(
        "p1",
        "sea",
        "ocean",
        format!("he dives into the {TARGET_SLOT}"),
    )
    .unwrap();

    for snr in [5.0, 0.0, -5.0] {
        let audio_a = word_audio(1, snr);
        let audio_b = word_audio(2, snr);
        let decision = choose(
            &pair,
            snr,
            &models,
            &lm,
            &lexicon,
            Some(&audio_a),
            Some(&audio_b),
        )
        .unwrap();
        println!(
            "at {snr:>4} dB choose {:?} over {:?} (predicted diff.HRS {:+.3}{})",
            decision.chosen,
            decision.alternative,
            decision.predicted_gain,
            if decision.tie { ", tie" } else { "" }
        );
        let f = &decision.features_a;
        println!(
            "  word_a-wins features: log.prob {:+.3}, diff.log.prob {:+.3}, ph.len {}, diff.ph.len {:+}, STOI {:.3}, diff.STOI {:+.3}",
            f.log_prob,
            f.diff_log_prob,
            f.ph_len,
            f.diff_ph_len,
            f.stoi.unwrap(),
            f.diff_stoi.unwrap()
        );
    }
}
