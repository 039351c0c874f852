//! From raw listener transcripts to Human Recognition Scores (HRS) and
//! synonym-pair recognition differences.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::audio::NoiseCondition;
use crate::error::{Error, Result};
use crate::lexicon::{normalize_word, PronunciationLexicon, SynonymPairRecord};
use crate::stats::student_t_two_sided_p;

/// One listener's transcript of one stimulus.
#[derive(Debug, Clone)]
pub struct ResponseRecord {
    pub stimulus_id: String,
    pub target: String,
    pub condition: NoiseCondition,
    pub participant_id: String,
    pub transcript: String,
}

/// Per-stimulus recognition score: hrs = n_correct / n_total.
#[derive(Debug, Clone)]
pub struct StimulusScore {
    pub stimulus_id: String,
    pub target: String,
    pub condition: NoiseCondition,
    pub n_correct: usize,
    pub n_total: usize,
    pub hrs: f64,
}

/// Recognition difference between the two members of a synonym pair in one
/// condition.
#[derive(Debug, Clone)]
pub struct PairComparison {
    pub pair_id: String,
    pub condition: NoiseCondition,
    pub hrs_a: f64,
    pub hrs_b: f64,
    pub diff_hrs: f64,
    pub hrs_min: f64,
    pub hrs_max: f64,
    pub winner: String,
    pub tie: bool,
}

/// Scoring mode: isolated single-word stimuli or whole-utterance transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgeMode {
    SingleWord,
    InContext,
}

/// Placeholder listeners write for an unheard word.
pub const PLACEHOLDER: &str = "...";

fn is_placeholder(token: &str) -> bool {
    token.len() >= 3 && token.chars().all(|c| c == '.')
}

/// Transcript tokens: lowercased, punctuation-stripped, with the "..."
/// placeholder preserved as its own token.
pub fn transcript_tokens(transcript: &str) -> Vec<String> {
    transcript
        .split_whitespace()
        .map(|raw| {
            if is_placeholder(raw) {
                PLACEHOLDER.to_string()
            } else {
                normalize_word(raw)
            }
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Judge one transcript against the target word.
///
/// Single-word mode treats the whole transcript as one token. In-context
/// mode accepts the target anywhere in the transcript; the placeholder
/// counts as no token. Empty transcripts are incorrect.
pub fn judge_response(
    lexicon: &PronunciationLexicon,
    target: &str,
    transcript: &str,
    mode: JudgeMode,
) -> bool {
    match mode {
        JudgeMode::SingleWord => {
            let token = normalize_word(transcript.trim());
            !token.is_empty() && lexicon.phonetic_match(target, &token)
        }
        JudgeMode::InContext => transcript_tokens(transcript)
            .iter()
            .filter(|t| *t != PLACEHOLDER)
            .any(|t| lexicon.phonetic_match(target, t)),
    }
}

/// Grouping key for a noise condition (exact on the dB value).
fn condition_key(c: &NoiseCondition) -> (String, u64) {
    (c.noise_id.clone(), c.snr_db.to_bits())
}

/// One [`StimulusScore`] per (stimulus_id, condition), ordered by stimulus
/// then condition.
pub fn compute_hrs(
    records: &[ResponseRecord],
    lexicon: &PronunciationLexicon,
    mode: JudgeMode,
) -> Result<Vec<StimulusScore>> {
    if records.is_empty() {
        return Err(Error::EmptyResponses);
    }
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for r in records {
        if !seen.insert((r.stimulus_id.clone(), r.participant_id.clone())) {
            return Err(Error::DuplicateResponse {
                stimulus_id: r.stimulus_id.clone(),
                participant_id: r.participant_id.clone(),
            });
        }
    }

    let mut groups: BTreeMap<(String, (String, u64)), Vec<&ResponseRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.stimulus_id.clone(), condition_key(&r.condition)))
            .or_default()
            .push(r);
    }
    let mut scores = Vec::with_capacity(groups.len());
    for ((stimulus_id, _), group) in groups {
        let n_total = group.len();
        let n_correct = group
            .iter()
            .filter(|r| judge_response(lexicon, &r.target, &r.transcript, mode))
            .count();
        scores.push(StimulusScore {
            stimulus_id,
            target: group[0].target.clone(),
            condition: group[0].condition.clone(),
            n_correct,
            n_total,
            hrs: n_correct as f64 / n_total as f64,
        });
    }
    Ok(scores)
}

/// Pooled recognition score of one word in one condition, aggregated over
/// every stimulus of that word.
fn pooled_hrs(
    scores: &[StimulusScore],
    word: &str,
    key: &(String, u64),
) -> Option<f64> {
    let norm = normalize_word(word);
    let mut correct = 0usize;
    let mut total = 0usize;
    for s in scores {
        if normalize_word(&s.target) == norm && condition_key(&s.condition) == *key {
            correct += s.n_correct;
            total += s.n_total;
        }
    }
    (total > 0).then(|| correct as f64 / total as f64)
}

/// Pair up scores per condition: diff_hrs = |hrs_a − hrs_b|, winner is the
/// higher-HRS word (ties fall to word_a and are flagged).
pub fn compare_pairs(
    scores: &[StimulusScore],
    pairs: &[SynonymPairRecord],
) -> Result<Vec<PairComparison>> {
    let mut keys: Vec<(String, u64)> = Vec::new();
    for s in scores {
        let k = condition_key(&s.condition);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.sort();

    let mut out = Vec::new();
    for pair in pairs {
        for key in &keys {
            let word_scored = |w: &str| {
                scores.iter().any(|s| {
                    normalize_word(&s.target) == normalize_word(w)
                })
            };
            // Conditions are only required for pairs that appear in the data
            // at all.
            if !word_scored(&pair.word_a) && !word_scored(&pair.word_b) {
                continue;
            }
            let hrs_a = pooled_hrs(scores, &pair.word_a, key).ok_or_else(|| {
                Error::MissingScore {
                    pair_id: pair.pair_id.clone(),
                    word: pair.word_a.clone(),
                    snr_db: f64::from_bits(key.1),
                }
            })?;
            let hrs_b = pooled_hrs(scores, &pair.word_b, key).ok_or_else(|| {
                Error::MissingScore {
                    pair_id: pair.pair_id.clone(),
                    word: pair.word_b.clone(),
                    snr_db: f64::from_bits(key.1),
                }
            })?;
            let tie = hrs_a == hrs_b;
            out.push(PairComparison {
                pair_id: pair.pair_id.clone(),
                condition: NoiseCondition::new(f64::from_bits(key.1), key.0.clone())?,
                hrs_a,
                hrs_b,
                diff_hrs: (hrs_a - hrs_b).abs(),
                hrs_min: hrs_a.min(hrs_b),
                hrs_max: hrs_a.max(hrs_b),
                winner: if hrs_a >= hrs_b {
                    pair.word_a.clone()
                } else {
                    pair.word_b.clone()
                },
                tie,
            });
        }
    }
    Ok(out)
}

/// Paired two-sided t-test between two matched samples.
#[derive(Debug, Clone)]
pub struct PairedTest {
    pub mean_difference: f64,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub n: usize,
}

/// Paired t-test on matched observations (e.g. per-pair diff.HRS under two
/// conditions). Needs at least two matched points.
pub fn paired_t_test(xs: &[f64], ys: &[f64]) -> Result<PairedTest> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            got: n,
        });
    }
    let diffs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let statistic = if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        f64::INFINITY * mean.signum()
    };
    let df = n - 1;
    let p_value = student_t_two_sided_p(statistic, df as f64);
    Ok(PairedTest {
        mean_difference: mean,
        statistic,
        df,
        p_value,
        n,
    })
}

/// Per-condition means plus the paired significance report between
/// consecutive conditions (ordered by decreasing SNR).
#[derive(Debug, Clone)]
pub struct ConditionSummary {
    pub condition: NoiseCondition,
    pub mean_hrs: f64,
    pub n_scores: usize,
    pub mean_diff_hrs: f64,
    pub n_pairs: usize,
}

pub fn condition_summary(
    scores: &[StimulusScore],
    comparisons: &[PairComparison],
) -> Result<Vec<ConditionSummary>> {
    if scores.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            got: scores.len(),
        });
    }
    let mut keys: Vec<(String, u64)> = Vec::new();
    for s in scores {
        let k = condition_key(&s.condition);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    // Decreasing SNR: low noise first.
    keys.sort_by(|a, b| {
        f64::from_bits(b.1)
            .partial_cmp(&f64::from_bits(a.1))
            .unwrap()
            .then(a.0.cmp(&b.0))
    });

    let mut out = Vec::new();
    for key in keys {
        let hrs: Vec<f64> = scores
            .iter()
            .filter(|s| condition_key(&s.condition) == key)
            .map(|s| s.hrs)
            .collect();
        let diffs: Vec<f64> = comparisons
            .iter()
            .filter(|c| condition_key(&c.condition) == key)
            .map(|c| c.diff_hrs)
            .collect();
        out.push(ConditionSummary {
            condition: NoiseCondition::new(f64::from_bits(key.1), key.0.clone())?,
            mean_hrs: hrs.iter().sum::<f64>() / hrs.len() as f64,
            n_scores: hrs.len(),
            mean_diff_hrs: if diffs.is_empty() {
                f64::NAN
            } else {
                diffs.iter().sum::<f64>() / diffs.len() as f64
            },
            n_pairs: diffs.len(),
        });
    }
    Ok(out)
}

/// Load responses from CSV with header
/// `stimulus_id,participant_id,target,condition_snr_db,noise_id,transcript`.
pub fn load_responses(path: impl AsRef<Path>) -> Result<Vec<ResponseRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let headers = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let required = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let c_stim = required("stimulus_id")?;
    let c_part = required("participant_id")?;
    let c_target = required("target")?;
    let c_snr = required("condition_snr_db")?;
    let c_noise = required("noise_id")?;
    let c_transcript = required("transcript")?;

    let mut records = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let field = |c: usize| record.get(c).unwrap_or_default().to_string();
        let snr_db: f64 = field(c_snr).parse().map_err(|_| Error::InvalidRecord {
            path: path.to_path_buf(),
            record: idx + 1,
            detail: format!("bad condition_snr_db {:?}", field(c_snr)),
        })?;
        records.push(ResponseRecord {
            stimulus_id: field(c_stim),
            participant_id: field(c_part),
            target: field(c_target),
            condition: NoiseCondition::new(snr_db, field(c_noise))?,
            transcript: field(c_transcript),
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyResponses);
    }
    Ok(records)
}
