//! From listener transcripts to Human Recognition Scores, synonym-pair
//! recognition differences, and a paired significance test between
//! conditions.
//!
//! Run with: cargo run --example score_transcripts

use std::io::Cursor;
use std::path::Path;

use lexinoise::analysis::{
    compare_pairs, compute_hrs, condition_summary, paired_t_test, JudgeMode, ResponseRecord,
};
use lexinoise::audio::NoiseCondition;
use lexinoise::lexicon::{PronunciationLexicon, SynonymPairRecord, TARGET_SLOT};

const LEXICON: &str = "\
SEA S IY1
SEE S IY1
OCEAN OW1 SH AH0 N
BIG B IH1 G
LARGE L AA1 R JH
";

fn main() {
    let lexicon =
        PronunciationLexicon::parse(Cursor::new(LEXICON), Path::new("<inline>")).unwrap();

    // Simulated experiment: at 0 dB "sea" is heard well and "ocean" poorly;
    // at -5 dB both degrade, "ocean" more. Listeners type "..." for words
    // they could not hear; homophones ("see") still count as correct.
    let mut records = Vec::new();
    let mut add = |target: &str, snr: f64, transcripts: &[&str]| {
        for (i, t) in transcripts.iter().enumerate() {
            records.push(ResponseRecord {
                stimulus_id: format!("{target}@{snr}"),
                target: target.to_string(),
                condition: NoiseCondition::new(snr, "babble").unwrap(),
                participant_id: format!("listener{i}"),
                transcript: t.to_string(),
            });
        }
    };
    add("sea", 0.0, &["into the sea", "into the see", "into the sea", "the sea"]);
    add("ocean", 0.0, &["into the ocean", "into the ...", "in the motion", "the ..."]);
    add("sea", -5.0, &["the sea", "the ...", "into the sea", "the tea"]);
    add("ocean", -5.0, &["the ...", "...", "the motion", "..."]);

    let scores = compute_hrs(&records, &lexicon, JudgeMode::InContext).unwrap();
    println!("{:>12} {:>7} {:>9} {:>6}", "stimulus", "SNR", "correct", "HRS");
    for s in &scores {
        println!(
            "{:>12} {:>7} {:>6}/{} {:>6.2}",
            s.stimulus_id, s.condition.snr_db, s.n_correct, s.n_total, s.hrs
        );
    }

    let pairs = vec![SynonymPairRecord::new(
        "p1",
        "sea",
        "ocean",
        format!("he dives into the {TARGET_SLOT}"),
    )
    .unwrap()];
    let comparisons = compare_pairs(&scores, &pairs).unwrap();
    println!();
    for c in &comparisons {
        println!(
            "pair {} at {:>4} dB: HRS {:.2} vs {:.2} -> diff.HRS {:.2}, winner {}",
            c.pair_id, c.condition.snr_db, c.hrs_a, c.hrs_b, c.diff_hrs, c.winner
        );
    }

    println!();
    for row in condition_summary(&scores, &comparisons).unwrap() {
        println!(
            "condition {:>4} dB: mean HRS {:.3} over {} stimuli, mean diff.HRS {:.3}",
            row.condition.snr_db, row.mean_hrs, row.n_scores, row.mean_diff_hrs
        );
    }

    // Paired test between the two conditions on per-stimulus HRS.
    let at = |snr: f64| -> Vec<f64> {
        scores
            .iter()
            .filter(|s| s.condition.snr_db == snr)
            .map(|s| s.hrs)
            .collect()
    };
    let test = paired_t_test(&at(0.0), &at(-5.0)).unwrap();
    println!(
        "\npaired t-test 0 dB vs -5 dB: mean diff {:.3}, t = {:.3}, df = {}, p = {:.3}",
        test.mean_difference, test.statistic, test.df, test.p_value
    );
}
