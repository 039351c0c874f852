//! Interpolated Kneser–Ney n-gram language model for contextual
//! predictability scoring.
//!
//! Tokenization is whitespace-based and lowercased. Sentences are padded with
//! start tokens and terminated with an end token. Words seen exactly once in
//! the training corpus are mapped to the unknown token, which gives OOV
//! queries a well-defined probability while keeping the distribution over the
//! event vocabulary normalized exactly.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const START_TOKEN: &str = "<s>";
pub const END_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_MAGIC: &str = "NGRAMLM";

type Gram = Box<[u32]>;

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    discount: f64,
    vocab: Vec<String>,
    vocab_index: HashMap<String, u32>,
    /// counts[k-1]: raw k-gram counts over padded sentences (windows ending
    /// in the start token are skipped).
    counts: Vec<HashMap<Gram, u64>>,

    // Derived tables, rebuilt deterministically from `counts`.
    event_vocab: Vec<u32>,
    ctx_total: HashMap<Gram, u64>,
    ctx_follow_types: HashMap<Gram, u64>,
    cont_count: Vec<HashMap<Gram, u64>>,
    cont_ctx_total: Vec<HashMap<Gram, u64>>,
    cont_follow_types: Vec<HashMap<Gram, u64>>,
}

pub fn tokenize(utterance: &str) -> Vec<String> {
    utterance
        .split_whitespace()
        .map(str::to_lowercase)
        .collect()
}

impl NgramModel {
    /// Train on a corpus of tokenized utterances.
    pub fn train(corpus: &[Vec<String>], order: usize, discount: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidOrder(order));
        }
        if !(0.0 < discount && discount < 1.0) {
            return Err(Error::InvalidDiscount(discount));
        }
        let sentences: Vec<&Vec<String>> = corpus.iter().filter(|s| !s.is_empty()).collect();
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        // Surface frequencies decide the unknown mapping: singletons become
        // <unk> so unseen words at query time share their probability mass.
        let mut surface: HashMap<&str, u64> = HashMap::new();
        for sent in &sentences {
            for tok in sent.iter() {
                *surface.entry(tok.as_str()).or_insert(0) += 1;
            }
        }

        let mut vocab = vec![
            START_TOKEN.to_string(),
            END_TOKEN.to_string(),
            UNK_TOKEN.to_string(),
        ];
        let mut vocab_index: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        // Deterministic vocab order: first occurrence in the corpus.
        for sent in &sentences {
            for tok in sent.iter() {
                if surface[tok.as_str()] >= 2 && !vocab_index.contains_key(tok) {
                    vocab_index.insert(tok.clone(), vocab.len() as u32);
                    vocab.push(tok.clone());
                }
            }
        }

        let start_id = 0u32;
        let unk_id = 2u32;
        let end_id = 1u32;

        let mut counts: Vec<HashMap<Gram, u64>> = vec![HashMap::new(); order];
        for sent in &sentences {
            let mut ids: Vec<u32> = Vec::with_capacity(sent.len() + order);
            ids.extend(std::iter::repeat_n(start_id, order.saturating_sub(1)));
            for tok in sent.iter() {
                ids.push(*vocab_index.get(tok).unwrap_or(&unk_id));
            }
            ids.push(end_id);
            for k in 1..=order {
                for window in ids.windows(k) {
                    if *window.last().unwrap() == start_id {
                        continue;
                    }
                    *counts[k - 1].entry(window.into()).or_insert(0) += 1;
                }
            }
        }

        let mut model = Self {
            order,
            discount,
            vocab,
            vocab_index,
            counts,
            event_vocab: Vec::new(),
            ctx_total: HashMap::new(),
            ctx_follow_types: HashMap::new(),
            cont_count: Vec::new(),
            cont_ctx_total: Vec::new(),
            cont_follow_types: Vec::new(),
        };
        model.rebuild_derived();
        Ok(model)
    }

    fn rebuild_derived(&mut self) {
        // Everything the start token can never be: an event.
        self.event_vocab = (1..self.vocab.len() as u32).collect();

        self.ctx_total.clear();
        self.ctx_follow_types.clear();
        for gram in self.counts[self.order - 1].keys() {
            let c = self.counts[self.order - 1][gram];
            let ctx: Gram = gram[..self.order - 1].into();
            *self.ctx_total.entry(ctx.clone()).or_insert(0) += c;
            *self.ctx_follow_types.entry(ctx).or_insert(0) += 1;
        }

        // Continuation tables for levels 1..order, derived from the raw
        // (k+1)-gram type inventory.
        self.cont_count = vec![HashMap::new(); self.order.saturating_sub(1)];
        self.cont_ctx_total = vec![HashMap::new(); self.order.saturating_sub(1)];
        self.cont_follow_types = vec![HashMap::new(); self.order.saturating_sub(1)];
        for k in 1..self.order {
            let mut cont: HashMap<Gram, u64> = HashMap::new();
            for gram in self.counts[k].keys() {
                let sfx: Gram = gram[1..].into();
                *cont.entry(sfx).or_insert(0) += 1;
            }
            let mut totals: HashMap<Gram, u64> = HashMap::new();
            let mut types: HashMap<Gram, u64> = HashMap::new();
            for (sfx, n) in &cont {
                let ctx: Gram = sfx[..k - 1].into();
                *totals.entry(ctx.clone()).or_insert(0) += n;
                *types.entry(ctx).or_insert(0) += 1;
            }
            self.cont_count[k - 1] = cont;
            self.cont_ctx_total[k - 1] = totals;
            self.cont_follow_types[k - 1] = types;
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Event vocabulary: every token a probability is assigned to (words seen
    /// at least twice, the unknown token, and the end token).
    pub fn event_tokens(&self) -> impl Iterator<Item = &str> {
        self.event_vocab
            .iter()
            .map(|&id| self.vocab[id as usize].as_str())
    }

    /// Raw training count of an n-gram, for inspection.
    pub fn raw_count(&self, gram: &[&str]) -> u64 {
        if gram.is_empty() || gram.len() > self.order {
            return 0;
        }
        let ids: Option<Vec<u32>> = gram
            .iter()
            .map(|t| self.vocab_index.get(&t.to_lowercase()).copied())
            .collect();
        match ids {
            Some(ids) => *self.counts[gram.len() - 1]
                .get(ids.as_slice())
                .unwrap_or(&0),
            None => 0,
        }
    }

    fn map_token(&self, token: &str) -> u32 {
        let lower = token.to_lowercase();
        *self
            .vocab_index
            .get(&lower)
            .unwrap_or(&self.vocab_index[UNK_TOKEN])
    }

    /// Interpolated Kneser–Ney probability at level `k` of event `w` given
    /// the length-(k-1) context.
    fn prob_level(&self, k: usize, ctx: &[u32], w: u32) -> f64 {
        if k == 0 {
            return 1.0 / self.event_vocab.len() as f64;
        }
        debug_assert_eq!(ctx.len(), k - 1);
        let lower = |model: &Self| {
            model.prob_level(k - 1, &ctx[if ctx.is_empty() { 0 } else { 1 }..], w)
        };
        if k == self.order {
            let total = *self.ctx_total.get(ctx).unwrap_or(&0);
            if total == 0 {
                return lower(self);
            }
            let mut key: Vec<u32> = Vec::with_capacity(k);
            key.extend_from_slice(ctx);
            key.push(w);
            let c = *self.counts[k - 1].get(key.as_slice()).unwrap_or(&0);
            let types = *self.ctx_follow_types.get(ctx).unwrap_or(&0);
            let t = total as f64;
            (c as f64 - self.discount).max(0.0) / t
                + self.discount * types as f64 / t * lower(self)
        } else {
            let total = *self.cont_ctx_total[k - 1].get(ctx).unwrap_or(&0);
            if total == 0 {
                return lower(self);
            }
            let mut key: Vec<u32> = Vec::with_capacity(k);
            key.extend_from_slice(ctx);
            key.push(w);
            let c = *self.cont_count[k - 1].get(key.as_slice()).unwrap_or(&0);
            let types = *self.cont_follow_types[k - 1].get(ctx).unwrap_or(&0);
            let t = total as f64;
            (c as f64 - self.discount).max(0.0) / t
                + self.discount * types as f64 / t * lower(self)
        }
    }

    /// Probability of `target` given the last (order − 1) words of
    /// `left_context` (start-padded when shorter). OOV words map to the
    /// unknown token.
    pub fn prob(&self, target: &str, left_context: &[String]) -> f64 {
        let w = self.map_token(target);
        let need = self.order - 1;
        let mut ctx: Vec<u32> = Vec::with_capacity(need);
        if left_context.len() < need {
            ctx.extend(std::iter::repeat_n(0u32, need - left_context.len()));
        }
        for tok in left_context
            .iter()
            .skip(left_context.len().saturating_sub(need))
        {
            ctx.push(self.map_token(tok));
        }
        self.prob_level(self.order, &ctx, w)
    }

    /// Natural-log probability of `target` given its left context.
    pub fn log_prob(&self, target: &str, left_context: &[String]) -> f64 {
        self.prob(target, left_context).ln()
    }

    /// Serialize to a line-based versioned dump of the raw count tables.
    /// Reloading rebuilds the derived tables and preserves `log_prob`
    /// outputs bit-for-bit.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = std::io::BufWriter::new(file);
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        writeln!(w, "{MODEL_MAGIC} {MODEL_FORMAT_VERSION}").map_err(io_err)?;
        writeln!(w, "order {}", self.order).map_err(io_err)?;
        writeln!(w, "discount {}", self.discount).map_err(io_err)?;
        writeln!(w, "vocab {}", self.vocab.len()).map_err(io_err)?;
        for tok in &self.vocab {
            writeln!(w, "{tok}").map_err(io_err)?;
        }
        for k in 1..=self.order {
            let table = &self.counts[k - 1];
            let mut entries: Vec<(&Gram, &u64)> = table.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            writeln!(w, "counts {k} {}", entries.len()).map_err(io_err)?;
            for (gram, c) in entries {
                let ids: Vec<String> = gram.iter().map(u32::to_string).collect();
                writeln!(w, "{} {c}", ids.join(" ")).map_err(io_err)?;
            }
        }
        writeln!(w, "end").map_err(io_err)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut lines = BufReader::new(file).lines();
        let fmt = |detail: &str| Error::ModelFormat {
            path: path.to_path_buf(),
            detail: detail.to_string(),
        };
        let mut next_line = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| fmt(&format!("truncated file, expected {what}")))?
                .map_err(|source| Error::Io {
                    path: path.to_path_buf(),
                    source,
                })
        };

        let header = next_line("header")?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MODEL_MAGIC) {
            return Err(fmt("missing magic header"));
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| fmt("missing format version"))?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion {
                path: path.to_path_buf(),
                found: version,
                supported: MODEL_FORMAT_VERSION,
            });
        }

        let parse_kv = |line: &str, key: &str| -> Result<String> {
            let mut it = line.split_whitespace();
            if it.next() != Some(key) {
                return Err(fmt(&format!("expected {key} line, got {line:?}")));
            }
            it.next()
                .map(str::to_string)
                .ok_or_else(|| fmt(&format!("missing value on {key} line")))
        };
        let order: usize = parse_kv(&next_line("order")?, "order")?
            .parse()
            .map_err(|_| fmt("bad order"))?;
        if order < 1 {
            return Err(Error::InvalidOrder(order));
        }
        let discount: f64 = parse_kv(&next_line("discount")?, "discount")?
            .parse()
            .map_err(|_| fmt("bad discount"))?;
        let vocab_len: usize = parse_kv(&next_line("vocab")?, "vocab")?
            .parse()
            .map_err(|_| fmt("bad vocab size"))?;
        let mut vocab = Vec::with_capacity(vocab_len);
        for _ in 0..vocab_len {
            vocab.push(next_line("vocab entry")?);
        }
        let vocab_index: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        if vocab_index.len() != vocab.len() {
            return Err(fmt("duplicate vocab entries"));
        }
        for required in [START_TOKEN, END_TOKEN, UNK_TOKEN] {
            if !vocab_index.contains_key(required) {
                return Err(fmt(&format!("vocab missing {required}")));
            }
        }

        let mut counts: Vec<HashMap<Gram, u64>> = vec![HashMap::new(); order];
        for k in 1..=order {
            let header = next_line("counts header")?;
            let mut it = header.split_whitespace();
            if it.next() != Some("counts") {
                return Err(fmt(&format!("expected counts header, got {header:?}")));
            }
            let got_k: usize = it
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| fmt("bad counts order"))?;
            if got_k != k {
                return Err(fmt(&format!("expected counts for order {k}, got {got_k}")));
            }
            let n: usize = it
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| fmt("bad counts length"))?;
            for _ in 0..n {
                let line = next_line("count entry")?;
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != k + 1 {
                    return Err(fmt(&format!("bad count entry {line:?}")));
                }
                let ids: Vec<u32> = fields[..k]
                    .iter()
                    .map(|v| v.parse::<u32>().map_err(|_| fmt("bad token id")))
                    .collect::<Result<_>>()?;
                if ids.iter().any(|&id| id as usize >= vocab.len()) {
                    return Err(fmt("token id out of range"));
                }
                let c: u64 = fields[k].parse().map_err(|_| fmt("bad count value"))?;
                counts[k - 1].insert(ids.into(), c);
            }
        }
        if next_line("end marker")? != "end" {
            return Err(fmt("missing end marker"));
        }

        let mut model = Self {
            order,
            discount,
            vocab,
            vocab_index,
            counts,
            event_vocab: Vec::new(),
            ctx_total: HashMap::new(),
            ctx_follow_types: HashMap::new(),
            cont_count: Vec::new(),
            cont_ctx_total: Vec::new(),
            cont_follow_types: Vec::new(),
        };
        model.rebuild_derived();
        Ok(model)
    }
}

/// Train from raw utterance lines (one utterance per line).
pub fn train_from_lines<S: AsRef<str>>(
    lines: &[S],
    order: usize,
    discount: f64,
) -> Result<NgramModel> {
    let corpus: Vec<Vec<String>> = lines.iter().map(|l| tokenize(l.as_ref())).collect();
    NgramModel::train(&corpus, order, discount)
}
