//! Skip-gram word embeddings with negative sampling, cosine neighbour
//! queries, and the word-per-line text format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Token;
use crate::error::{Error, Result};

/// Surface form of the reserved out-of-vocabulary entry at index 0.
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    /// Corpus frequency per entry; all zero for a vocabulary read back from
    /// an embedding file. The UNK count totals the discarded words.
    counts: Vec<u64>,
}

impl Vocabulary {
    /// Builds a vocabulary from an explicit word list; `words[0]` must be UNK.
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        if words.first().map(String::as_str) != Some(UNK) {
            return Err(Error::Format(format!("vocabulary must start with `{UNK}`")));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary word `{w}`")));
            }
        }
        let counts = vec![0; words.len()];
        Ok(Vocabulary { words, index, counts })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Index of `word`, or 0 (UNK) when absent.
    pub fn id(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(0)
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn ids<'a>(&self, tokens: impl IntoIterator<Item = &'a Token>) -> Vec<usize> {
        tokens.into_iter().map(|t| self.id(t.as_str())).collect()
    }
}

/// Counts words, keeps those seen at least `min_count` times, and orders them
/// by descending frequency with ties broken by first occurrence.
pub fn build_vocab(sentences: &[Vec<Token>], min_count: u64) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    let mut first_seen: HashMap<&str, (usize, u64)> = HashMap::new();
    let mut total = 0u64;
    for tok in sentences.iter().flatten() {
        let n = first_seen.len();
        first_seen.entry(tok.as_str()).or_insert((n, 0)).1 += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::Config("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut kept: Vec<(&str, usize, u64)> = first_seen
        .into_iter()
        .filter(|(_, (_, c))| *c >= min_count)
        .map(|(w, (order, c))| (w, order, c))
        .collect();
    kept.sort_by(|a, b| b.2.cmp(&a.2).then(a.1.cmp(&b.1)));

    let mut words = vec![UNK.to_string()];
    let mut counts = vec![total - kept.iter().map(|k| k.2).sum::<u64>()];
    for (w, _, c) in kept {
        words.push(w.to_string());
        counts.push(c);
    }
    let mut vocab = Vocabulary::from_words(words)?;
    vocab.counts = counts;
    Ok(vocab)
}

/// `|V| x d` vectors indexed like the vocabulary they were trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub vectors: Array2<f64>,
    pub trainable: bool,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn row(&self, id: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(id)
    }

    pub fn all_finite(&self) -> bool {
        self.vectors.iter().all(|v| v.is_finite())
    }
}

/// A vocabulary with its aligned embedding table.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    pub vocab: Vocabulary,
    pub table: EmbeddingTable,
}

impl WordVectors {
    pub fn new(vocab: Vocabulary, table: EmbeddingTable) -> Result<Self> {
        if table.vectors.nrows() != vocab.len() {
            return Err(Error::Shape(format!(
                "table has {} rows for {} vocabulary entries",
                table.vectors.nrows(),
                vocab.len()
            )));
        }
        Ok(WordVectors { vocab, table })
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.table.vectors
    }

    pub fn ids<'a>(&self, tokens: impl IntoIterator<Item = &'a Token>) -> Vec<usize> {
        self.vocab.ids(tokens)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (table, vocab) = load_embeddings(path)?;
        Ok(WordVectors { vocab, table })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_embeddings(&self.table, &self.vocab, path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly towards `lr * 1e-4`.
    pub lr: f64,
    pub min_count: u64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr: 0.025,
            min_count: 2,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramOutput {
    pub table: EmbeddingTable,
    /// Mean negative-sampling loss per (centre, context) pair, per epoch.
    pub epoch_losses: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Skip-gram with negative sampling. Every ordered pair within `window` of
/// each other is a positive example; negatives come from the unigram
/// distribution raised to 3/4. Returns the centre-vector table.
pub fn train_skipgram(sentences: &[Vec<Token>], vocab: &Vocabulary, cfg: &SkipGramConfig) -> Result<SkipGramOutput> {
    if cfg.dim == 0 || cfg.window == 0 || cfg.epochs == 0 {
        return Err(Error::Config("dimension, window and epochs must be positive".into()));
    }
    if !(cfg.lr > 0.0) {
        return Err(Error::Config(format!("learning rate {} must be positive", cfg.lr)));
    }
    let ids: Vec<Vec<usize>> = sentences.iter().map(|s| vocab.ids(s)).collect();
    let mut freq = vec![0u64; vocab.len()];
    for &i in ids.iter().flatten() {
        freq[i] += 1;
    }
    let weights: Vec<f64> = freq.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let noise = WeightedIndex::new(&weights)
        .map_err(|e| Error::Config(format!("vocabulary does not cover the corpus: {e}")))?;

    let d = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centre = Array2::from_shape_simple_fn((vocab.len(), d), || (rng.random::<f64>() - 0.5) / d as f64);
    let mut context = Array2::<f64>::zeros((vocab.len(), d));
    let total_steps = (cfg.epochs * ids.iter().map(Vec::len).sum::<usize>()).max(1);
    let min_lr = cfg.lr * 1e-4;
    let mut step = 0usize;
    let mut grad = Array1::<f64>::zeros(d);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        let (mut loss, mut pairs) = (0.0, 0u64);
        for sent in &ids {
            for (pos, &c) in sent.iter().enumerate() {
                let lr = (cfg.lr * (1.0 - step as f64 / total_steps as f64)).max(min_lr);
                step += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window + 1).min(sent.len());
                for (cpos, &o) in sent.iter().enumerate().take(hi).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad.fill(0.0);
                    let v = centre.row(c).to_owned();
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (o, 1.0)
                        } else {
                            let n = noise.sample(&mut rng);
                            if n == o {
                                continue;
                            }
                            (n, 0.0)
                        };
                        let mut u = context.row_mut(target);
                        let score = v.dot(&u);
                        let p = sigmoid(score);
                        loss -= if label == 1.0 {
                            p.max(1e-12).ln()
                        } else {
                            (1.0 - p).max(1e-12).ln()
                        };
                        let g = lr * (label - p);
                        grad.scaled_add(g, &u);
                        u.scaled_add(g, &v);
                    }
                    let mut row = centre.row_mut(c);
                    row += &grad;
                    pairs += 1;
                }
            }
        }
        epoch_losses.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
    }
    let table = EmbeddingTable {
        vectors: centre,
        trainable: false,
    };
    if !table.all_finite() {
        return Err(Error::Invariant("non-finite embedding after training".into()));
    }
    Ok(SkipGramOutput { table, epoch_losses })
}

/// Cosine similarity, 0 when either vector is zero.
pub fn cosine(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Top-`k` words by cosine similarity to `word` (UNK when absent), excluding
/// the query entry and UNK itself; ties keep vocabulary order.
pub fn nearest(table: &EmbeddingTable, vocab: &Vocabulary, word: &str, k: usize) -> Vec<(String, f64)> {
    let q = vocab.id(word);
    let qv = table.row(q);
    let mut scored: Vec<(usize, f64)> = (1..vocab.len())
        .filter(|&i| i != q)
        .map(|i| (i, cosine(qv, table.row(i))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
        .into_iter()
        .take(k)
        .map(|(i, s)| (vocab.word(i).to_string(), s))
        .collect()
}

/// Header `|V| d`, then `word v_1 ... v_d` per entry with shortest
/// round-trip decimal formatting.
pub fn save_embeddings(table: &EmbeddingTable, vocab: &Vocabulary, path: &Path) -> Result<()> {
    if table.vectors.nrows() != vocab.len() {
        return Err(Error::Shape(format!(
            "table has {} rows for {} vocabulary entries",
            table.vectors.nrows(),
            vocab.len()
        )));
    }
    let mut out = format!("{} {}\n", vocab.len(), table.dim());
    for (i, w) in vocab.words().iter().enumerate() {
        out.push_str(w);
        for v in table.row(i) {
            write!(out, " {v}").expect("writing to a string");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_embeddings(path: &Path) -> Result<(EmbeddingTable, Vocabulary)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| perr(1, "missing header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| perr(1, format!("bad header: {e}")))?;
    let [n, d] = dims[..] else {
        return Err(perr(1, "header must be `<rows> <dim>`".into()));
    };
    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default().to_string();
        let mut row = 0;
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|e| perr(i + 1, format!("word `{word}`: bad number `{f}`: {e}")))?;
            if !v.is_finite() {
                return Err(perr(i + 1, format!("word `{word}`: non-finite component")));
            }
            data.push(v);
            row += 1;
        }
        if row != d {
            return Err(perr(i + 1, format!("word `{word}` has {row} components, expected {d}")));
        }
        words.push(word);
    }
    if words.len() != n {
        return Err(perr(1, format!("header declares {n} rows, found {}", words.len())));
    }
    let vocab = Vocabulary::from_words(words)?;
    let vectors = Array2::from_shape_vec((n, d), data).expect("row lengths checked");
    Ok((
        EmbeddingTable {
            vectors,
            trainable: false,
        },
        vocab,
    ))
}
