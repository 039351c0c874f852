//! Feature extraction for synonym pairs and noise-robust word choice under a
//! per-condition linear model.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::AudioSignal;
use crate::error::{Error, Result};
use crate::lexicon::{PronunciationLexicon, SynonymPairRecord};
use crate::ngram::NgramModel;
use crate::stoi::compute_stoi;

/// Feature names as they appear in model files and feature CSVs.
pub const LOG_PROB: &str = "log.prob";
pub const DIFF_LOG_PROB: &str = "diff.log.prob";
pub const PH_LEN: &str = "ph.len";
pub const DIFF_PH_LEN: &str = "diff.ph.len";
pub const STOI: &str = "STOI";
pub const DIFF_STOI: &str = "diff.STOI";
pub const INTERCEPT: &str = "intercept";

pub const FEATURE_NAMES: [&str; 6] = [
    LOG_PROB,
    DIFF_LOG_PROB,
    PH_LEN,
    DIFF_PH_LEN,
    STOI,
    DIFF_STOI,
];

/// Clean/degraded audio for one word's utterance, with an optional target
/// span (sample range) to score instead of the whole signal.
#[derive(Debug, Clone)]
pub struct WordAudio {
    pub clean: AudioSignal,
    pub degraded: AudioSignal,
    pub span: Option<(usize, usize)>,
}

impl WordAudio {
    fn stoi(&self) -> Result<f64> {
        match self.span {
            Some((start, end)) => compute_stoi(
                &self.clean.slice(start, end)?,
                &self.degraded.slice(start, end)?,
            ),
            None => compute_stoi(&self.clean, &self.degraded),
        }
    }
}

/// Per-word features before pairing into winner/alternative differences.
#[derive(Debug, Clone, Serialize)]
pub struct WordFeatures {
    pub word: String,
    pub log_prob: f64,
    pub ph_len: f64,
    pub stoi: Option<f64>,
}

/// Compute one word's features in the pair's context.
pub fn word_features(
    word: &str,
    pair: &SynonymPairRecord,
    lm: &NgramModel,
    lexicon: &PronunciationLexicon,
    audio: Option<&WordAudio>,
) -> Result<WordFeatures> {
    let ph_len = lexicon.phoneme_length(word)? as f64;
    let log_prob = lm.log_prob(word, &pair.left_context());
    let stoi = audio.map(WordAudio::stoi).transpose()?;
    Ok(WordFeatures {
        word: word.to_string(),
        log_prob,
        ph_len,
        stoi,
    })
}

/// The six per-pair predictors under one winner hypothesis: per-word values
/// of the hypothesized winner plus winner-minus-alternative differences.
#[derive(Debug, Clone, Serialize)]
pub struct FeatureVector {
    pub log_prob: f64,
    pub diff_log_prob: f64,
    pub ph_len: f64,
    pub diff_ph_len: f64,
    pub stoi: Option<f64>,
    pub diff_stoi: Option<f64>,
}

impl FeatureVector {
    /// Pair the hypothesized winner's features against the alternative's.
    pub fn from_words(winner: &WordFeatures, alternative: &WordFeatures) -> Self {
        Self {
            log_prob: winner.log_prob,
            diff_log_prob: winner.log_prob - alternative.log_prob,
            ph_len: winner.ph_len,
            diff_ph_len: winner.ph_len - alternative.ph_len,
            stoi: winner.stoi,
            diff_stoi: match (winner.stoi, alternative.stoi) {
                (Some(w), Some(a)) => Some(w - a),
                _ => None,
            },
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            LOG_PROB => Some(self.log_prob),
            DIFF_LOG_PROB => Some(self.diff_log_prob),
            PH_LEN => Some(self.ph_len),
            DIFF_PH_LEN => Some(self.diff_ph_len),
            STOI => self.stoi,
            DIFF_STOI => self.diff_stoi,
            _ => None,
        }
    }
}

/// Extract the full feature vector for one winner hypothesis over a pair.
#[allow(clippy::too_many_arguments)]
pub fn extract_features(
    pair: &SynonymPairRecord,
    winner: &str,
    alternative: &str,
    lm: &NgramModel,
    lexicon: &PronunciationLexicon,
    winner_audio: Option<&WordAudio>,
    alternative_audio: Option<&WordAudio>,
) -> Result<FeatureVector> {
    let w = word_features(winner, pair, lm, lexicon, winner_audio)?;
    let a = word_features(alternative, pair, lm, lexicon, alternative_audio)?;
    Ok(FeatureVector::from_words(&w, &a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Fitted,
    Canonical,
}

/// A linear diff.HRS model valid over one SNR band. `snr_min`/`snr_max` are
/// the half-open band bounds [min, max); `null` means unbounded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionModel {
    pub snr_min: Option<f64>,
    pub snr_max: Option<f64>,
    pub provenance: Provenance,
    /// Coefficient per feature name, plus `intercept`.
    pub coefficients: BTreeMap<String, f64>,
}

impl ConditionModel {
    pub fn covers(&self, snr_db: f64) -> bool {
        self.snr_min.is_none_or(|lo| snr_db >= lo)
            && self.snr_max.is_none_or(|hi| snr_db < hi)
    }

    pub fn intercept(&self) -> f64 {
        self.coefficients.get(INTERCEPT).copied().unwrap_or(0.0)
    }

    /// True when the model references an acoustic (STOI-based) feature.
    pub fn needs_stoi(&self) -> bool {
        self.coefficients.contains_key(STOI) || self.coefficients.contains_key(DIFF_STOI)
    }

    fn validate(&self) -> Result<()> {
        for name in self.coefficients.keys() {
            if name != INTERCEPT && !FEATURE_NAMES.contains(&name.as_str()) {
                return Err(Error::InvalidModelSet(format!(
                    "unknown coefficient {name:?}"
                )));
            }
        }
        if let (Some(lo), Some(hi)) = (self.snr_min, self.snr_max) {
            if lo >= hi {
                return Err(Error::InvalidModelSet(format!(
                    "empty band [{lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

/// Predicted diff.HRS: intercept + Σ βᵢ·featureᵢ over the model's named
/// coefficients.
pub fn predict_diff_hrs(features: &FeatureVector, model: &ConditionModel) -> Result<f64> {
    let mut acc = model.intercept();
    for (name, beta) in &model.coefficients {
        if name == INTERCEPT {
            continue;
        }
        let value = features
            .get(name)
            .ok_or_else(|| Error::MissingFeature(name.clone()))?;
        acc += beta * value;
    }
    Ok(acc)
}

/// A set of condition models whose SNR bands partition the real line.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelSet {
    models: Vec<ConditionModel>,
}

impl ModelSet {
    pub fn new(mut models: Vec<ConditionModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidModelSet("no models".into()));
        }
        for m in &models {
            m.validate()?;
        }
        models.sort_by(|a, b| {
            let lo_a = a.snr_min.unwrap_or(f64::NEG_INFINITY);
            let lo_b = b.snr_min.unwrap_or(f64::NEG_INFINITY);
            lo_a.partial_cmp(&lo_b).unwrap()
        });
        if models[0].snr_min.is_some() {
            return Err(Error::InvalidModelSet(
                "lowest band must be unbounded below".into(),
            ));
        }
        if models[models.len() - 1].snr_max.is_some() {
            return Err(Error::InvalidModelSet(
                "highest band must be unbounded above".into(),
            ));
        }
        for w in models.windows(2) {
            match (w[0].snr_max, w[1].snr_min) {
                (Some(hi), Some(lo)) if hi == lo => {}
                (hi, lo) => {
                    return Err(Error::InvalidModelSet(format!(
                        "bands do not meet: max {hi:?} vs next min {lo:?}"
                    )));
                }
            }
        }
        Ok(Self { models })
    }

    /// The canonical models shipped with the crate: Table-style significant
    /// coefficients per tested condition, banded at the midpoints between
    /// SNR 5, 0 and -5 dB. Sign-and-ranking devices; refit on your own data
    /// for calibrated predictions.
    pub fn canonical() -> Self {
        let json = include_str!("../data/canonical_models.json");
        Self::from_json(json).expect("canonical model file must be valid")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let models: Vec<ConditionModel> = serde_json::from_str(json)
            .map_err(|e| Error::InvalidModelSet(e.to_string()))?;
        Self::new(models)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn models(&self) -> &[ConditionModel] {
        &self.models
    }

    /// The single model covering an SNR.
    pub fn model_for(&self, snr_db: f64) -> Result<&ConditionModel> {
        self.models
            .iter()
            .find(|m| m.covers(snr_db))
            .ok_or(Error::NoModelForSnr(snr_db))
    }
}

/// The outcome of choosing between a pair's two members.
#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub pair_id: String,
    pub chosen: String,
    pub alternative: String,
    /// Predicted diff.HRS under the winning hypothesis.
    pub predicted_gain: f64,
    pub tie: bool,
    /// Features under the hypothesis that word_a wins.
    pub features_a: FeatureVector,
    /// Features under the hypothesis that word_b wins.
    pub features_b: FeatureVector,
    pub provenance: Provenance,
}

/// Evaluate both winner hypotheses under the condition's model and keep the
/// one with the larger predicted diff.HRS. Predictions closer than 1e-9 are
/// flagged as ties and fall back to word_a.
pub fn choose(
    pair: &SynonymPairRecord,
    snr_db: f64,
    models: &ModelSet,
    lm: &NgramModel,
    lexicon: &PronunciationLexicon,
    audio_a: Option<&WordAudio>,
    audio_b: Option<&WordAudio>,
) -> Result<Decision> {
    let model = models.model_for(snr_db)?;
    if model.needs_stoi() && (audio_a.is_none() || audio_b.is_none()) {
        let (word, missing) = if audio_a.is_none() {
            (&pair.word_a, audio_a)
        } else {
            (&pair.word_b, audio_b)
        };
        debug_assert!(missing.is_none());
        return Err(Error::MissingAudio {
            pair_id: pair.pair_id.clone(),
            word: word.clone(),
        });
    }
    // STOI features are computed only when available; a text-only model never
    // requires them.
    let fa = word_features(&pair.word_a, pair, lm, lexicon, audio_a)?;
    let fb = word_features(&pair.word_b, pair, lm, lexicon, audio_b)?;
    let features_a = FeatureVector::from_words(&fa, &fb);
    let features_b = FeatureVector::from_words(&fb, &fa);
    let pred_a = predict_diff_hrs(&features_a, model)?;
    let pred_b = predict_diff_hrs(&features_b, model)?;

    let tie = (pred_a - pred_b).abs() < 1e-9;
    let a_wins = tie || pred_a > pred_b;
    Ok(Decision {
        pair_id: pair.pair_id.clone(),
        chosen: if a_wins {
            pair.word_a.clone()
        } else {
            pair.word_b.clone()
        },
        alternative: if a_wins {
            pair.word_b.clone()
        } else {
            pair.word_a.clone()
        },
        predicted_gain: pred_a.max(pred_b),
        tie,
        features_a,
        features_b,
        provenance: model.provenance,
    })
}
