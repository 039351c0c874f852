//! Pronunciation lexicon, phoneme-length features, homophone-tolerant word
//! matching, and synonym-pair ingestion.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Case-insensitive map from word to its pronunciations, each an ordered
/// sequence of phoneme labels (ARPABET-style, stress digits allowed).
#[derive(Debug, Clone, Default)]
pub struct PronunciationLexicon {
    entries: HashMap<String, Vec<Vec<String>>>,
    // Insertion order, for round-trip serialization.
    order: Vec<String>,
}

/// Strip a trailing stress digit from a phoneme label: "AE1" → "AE".
fn strip_stress(phoneme: &str) -> &str {
    phoneme.trim_end_matches(|c: char| c.is_ascii_digit())
}

/// Lowercase and strip leading/trailing punctuation.
pub fn normalize_word(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
        .to_lowercase()
}

impl PronunciationLexicon {
    /// Parse the pronouncing-dictionary text format: one entry per line,
    /// `WORD PH PH ...`, with alternate pronunciations marked `WORD(n)`.
    /// Lines starting with `;;;` are comments (ARPABET dictionary layout).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(BufReader::new(file), path)
    }

    pub fn parse(reader: impl BufRead, path: &Path) -> Result<Self> {
        let mut lex = Self::default();
        let mut any = false;
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(";;;") {
                continue;
            }
            any = true;
            let mut tokens = trimmed.split_whitespace();
            let raw_word = tokens.next().expect("non-empty line");
            let phonemes: Vec<String> = tokens.map(str::to_string).collect();
            if phonemes.is_empty() {
                return Err(Error::MalformedLexiconLine {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    detail: format!("word {raw_word:?} has no phonemes"),
                });
            }
            // WORD(2), WORD(3), ... mark alternates of WORD.
            let word = match raw_word.find('(') {
                Some(p) if raw_word.ends_with(')') => &raw_word[..p],
                _ => raw_word,
            };
            let key = word.to_lowercase();
            if key.is_empty() {
                return Err(Error::MalformedLexiconLine {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    detail: "empty word".into(),
                });
            }
            let entry = lex.entries.entry(key.clone()).or_insert_with(|| {
                lex.order.push(key);
                Vec::new()
            });
            entry.push(phonemes);
        }
        if !any {
            return Err(Error::EmptyLexicon {
                path: path.to_path_buf(),
            });
        }
        Ok(lex)
    }

    /// Dump back to the text format accepted by [`PronunciationLexicon::load`].
    pub fn write(&self, mut writer: impl Write) -> std::io::Result<()> {
        for word in &self.order {
            for (i, pron) in self.entries[word].iter().enumerate() {
                let upper = word.to_uppercase();
                if i == 0 {
                    write!(writer, "{upper}")?;
                } else {
                    write!(writer, "{upper}({})", i + 1)?;
                }
                for ph in pron {
                    write!(writer, " {ph}")?;
                }
                writeln!(writer)?;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(&normalize_word(word))
    }

    /// All pronunciations for a word, primary first.
    pub fn pronunciations(&self, word: &str) -> Option<&[Vec<String>]> {
        self.entries
            .get(&normalize_word(word))
            .map(Vec::as_slice)
    }

    /// Number of phonemes in the word's primary (first-listed) pronunciation.
    /// Stress digits do not add to the count.
    pub fn phoneme_length(&self, word: &str) -> Result<usize> {
        self.pronunciations(word)
            .map(|prons| prons[0].len())
            .ok_or_else(|| Error::OovWord(word.to_string()))
    }

    /// True iff the normalized strings are equal or any pronunciation of
    /// `target` equals any pronunciation of `response` (stress-insensitive).
    /// OOV words fall back to string equality.
    pub fn phonetic_match(&self, target: &str, response: &str) -> bool {
        let t = normalize_word(target);
        let r = normalize_word(response);
        if t == r {
            return true;
        }
        match (self.entries.get(&t), self.entries.get(&r)) {
            (Some(t_prons), Some(r_prons)) => t_prons.iter().any(|tp| {
                r_prons.iter().any(|rp| {
                    tp.len() == rp.len()
                        && tp
                            .iter()
                            .zip(rp)
                            .all(|(a, b)| strip_stress(a) == strip_stress(b))
                })
            }),
            _ => false,
        }
    }
}

/// Literal token marking the target slot in a pair's context utterance.
pub const TARGET_SLOT: &str = "{TARGET}";

/// A synonym pair sharing one utterance context with a single target slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SynonymPairRecord {
    pub pair_id: String,
    pub word_a: String,
    pub word_b: String,
    pub context: String,
    pub audio_a: Option<String>,
    pub audio_b: Option<String>,
}

impl SynonymPairRecord {
    pub fn new(
        pair_id: impl Into<String>,
        word_a: impl Into<String>,
        word_b: impl Into<String>,
        context: impl Into<String>,
    ) -> Result<Self> {
        let rec = Self {
            pair_id: pair_id.into(),
            word_a: word_a.into(),
            word_b: word_b.into(),
            context: context.into(),
            audio_a: None,
            audio_b: None,
        };
        rec.validate()?;
        Ok(rec)
    }

    fn validate(&self) -> Result<()> {
        if normalize_word(&self.word_a) == normalize_word(&self.word_b) {
            return Err(Error::Other(format!(
                "pair {}: word_a and word_b are both {:?}",
                self.pair_id, self.word_a
            )));
        }
        let slots = self.context.matches(TARGET_SLOT).count();
        if slots != 1 {
            return Err(Error::Other(format!(
                "pair {}: context must contain exactly one {TARGET_SLOT} slot, found {slots}",
                self.pair_id
            )));
        }
        Ok(())
    }

    /// Tokens left of the target slot, lowercased.
    pub fn left_context(&self) -> Vec<String> {
        let prefix = self
            .context
            .split(TARGET_SLOT)
            .next()
            .unwrap_or_default();
        prefix
            .split_whitespace()
            .map(normalize_word)
            .filter(|t| !t.is_empty())
            .collect()
    }

    /// Context with the slot filled by `word`.
    pub fn realize(&self, word: &str) -> String {
        self.context.replace(TARGET_SLOT, word)
    }
}

/// Load synonym pairs from CSV with header
/// `pair_id,word_a,word_b,context[,audio_a,audio_b]`.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<SynonymPairRecord>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
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
    let col = |name: &str| -> Option<usize> { headers.iter().position(|h| h == name) };
    let required = |name: &str| -> Result<usize> {
        col(name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
    };
    let c_id = required("pair_id")?;
    let c_a = required("word_a")?;
    let c_b = required("word_b")?;
    let c_ctx = required("context")?;
    let c_audio_a = col("audio_a");
    let c_audio_b = col("audio_b");

    let mut pairs = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let field = |c: usize| record.get(c).unwrap_or_default().to_string();
        let opt = |c: Option<usize>| {
            c.map(&field).filter(|s| !s.is_empty())
        };
        let mut rec = SynonymPairRecord {
            pair_id: field(c_id),
            word_a: field(c_a),
            word_b: field(c_b),
            context: field(c_ctx),
            audio_a: opt(c_audio_a),
            audio_b: opt(c_audio_b),
        };
        rec.validate().map_err(|e| Error::InvalidPairRecord {
            path: path.to_path_buf(),
            record: idx + 1,
            detail: e.to_string(),
        })?;
        if !seen_ids.insert(rec.pair_id.clone()) {
            return Err(Error::InvalidPairRecord {
                path: path.to_path_buf(),
                record: idx + 1,
                detail: format!("duplicate pair_id {:?}", rec.pair_id),
            });
        }
        rec.word_a = rec.word_a.trim().to_string();
        rec.word_b = rec.word_b.trim().to_string();
        pairs.push(rec);
    }
    Ok(pairs)
}
