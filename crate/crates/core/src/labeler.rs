//! Generic sequence labeler shared by the tagging stages: per-token input
//! vectors built from a frozen word table and learned categorical feature
//! embeddings, an LSTM or BiLSTM encoder, dropout, a linear projection to
//! label scores, and a linear-chain CRF.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{s, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::{
    bilstm_backward, bilstm_forward, bptt_backward, dropout, lstm_forward, CrfParams, Linear, LstmParams, Parameters,
    Rmsprop,
};

/// Model file magic bytes.
pub const MODEL_MAGIC: &[u8; 4] = b"FQPM";
/// Current model file format version.
pub const MODEL_VERSION: u32 = 1;

/// Sentences per gradient task; the reduction order over tasks is fixed, so
/// results do not depend on the thread count.
const GRAD_CHUNK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Lstm,
    Bilstm,
}

/// A learned embedding table for a categorical per-token feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub cardinality: usize,
    pub dim: usize,
}

/// Layer specification stored in the model header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelerConfig {
    pub stage: String,
    pub encoder: EncoderKind,
    /// Hidden units per direction.
    pub hidden: usize,
    pub dropout: f64,
    pub word_dim: usize,
    /// Fine-tune a private copy of the word table instead of reading the
    /// shared frozen one.
    #[serde(default)]
    pub finetune_words: bool,
    pub features: Vec<FeatureSpec>,
    pub labels: Vec<String>,
}

impl LabelerConfig {
    pub fn input_dim(&self) -> usize {
        self.word_dim + self.features.iter().map(|f| f.dim).sum::<usize>()
    }

    pub fn encoder_dim(&self) -> usize {
        match self.encoder {
            EncoderKind::Lstm => self.hidden,
            EncoderKind::Bilstm => 2 * self.hidden,
        }
    }
}

/// All trainable arrays of a labeler; also used as the gradient container.
///
/// Tensor order (also the on-disk order): private word table (if any),
/// feature tables in declaration order, forward LSTM `W, U, b`, backward
/// LSTM `W, U, b` (BiLSTM only), projection `W, b`, CRF transitions, start,
/// stop.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelerParams {
    pub word_table: Option<Array2<f64>>,
    pub feature_tables: Vec<Array2<f64>>,
    pub fwd: LstmParams,
    pub bwd: Option<LstmParams>,
    pub proj: Linear,
    pub crf: CrfParams,
}

impl LabelerParams {
    fn zeros_like(&self) -> Self {
        LabelerParams {
            word_table: self.word_table.as_ref().map(|w| Array2::zeros(w.dim())),
            feature_tables: self.feature_tables.iter().map(|t| Array2::zeros(t.dim())).collect(),
            fwd: self.fwd.zeros_like(),
            bwd: self.bwd.as_ref().map(LstmParams::zeros_like),
            proj: Linear::zeros(self.proj.input_dim(), self.proj.output_dim()),
            crf: CrfParams::zeros(self.crf.num_labels()),
        }
    }
}

impl Parameters for LabelerParams {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::new();
        if let Some(w) = &self.word_table {
            v.push(w.as_slice().expect("standard layout"));
        }
        for t in &self.feature_tables {
            v.push(t.as_slice().expect("standard layout"));
        }
        v.extend(self.fwd.tensors());
        if let Some(b) = &self.bwd {
            v.extend(b.tensors());
        }
        v.extend(self.proj.tensors());
        v.extend(self.crf.tensors());
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = Vec::new();
        if let Some(w) = &mut self.word_table {
            v.push(w.as_slice_mut().expect("standard layout"));
        }
        for t in &mut self.feature_tables {
            v.push(t.as_slice_mut().expect("standard layout"));
        }
        v.extend(self.fwd.tensors_mut());
        if let Some(b) = &mut self.bwd {
            v.extend(b.tensors_mut());
        }
        v.extend(self.proj.tensors_mut());
        v.extend(self.crf.tensors_mut());
        v
    }
}

/// Token ids of one sentence: word-table rows plus one id sequence per
/// configured feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceInput {
    pub words: Vec<usize>,
    pub features: Vec<Vec<usize>>,
}

impl SequenceInput {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub input: SequenceInput,
    pub gold: Vec<usize>,
}

/// Decoded labels with the marginal probability of each chosen label.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<usize>,
    pub confidences: Vec<f64>,
    pub marginals: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    /// Stop after this many epochs without dev-accuracy improvement.
    pub patience: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 30,
            batch_size: 32,
            lr: 1e-3,
            rho: 0.9,
            eps: 1e-8,
            patience: Some(3),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// Epoch whose parameters were kept (1-based).
    pub best_epoch: usize,
}

struct Forward {
    encoded: Array2<f64>,
    mask: Option<Array2<f64>>,
    emissions: Array2<f64>,
    cache: EncoderCache,
    x: Array2<f64>,
}

enum EncoderCache {
    Uni(crate::nn::LstmCache),
    Bi(crate::nn::BiLstmCache),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceLabeler {
    pub config: LabelerConfig,
    pub params: LabelerParams,
}

impl SequenceLabeler {
    /// Freshly initialized model. `words` seeds the private word table when
    /// fine-tuning is enabled.
    pub fn new(config: LabelerConfig, words: &Array2<f64>, seed: u64) -> Result<Self> {
        if config.labels.is_empty() {
            return Err(Error::Config("label set is empty".into()));
        }
        if !(0.0..1.0).contains(&config.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", config.dropout)));
        }
        if words.ncols() != config.word_dim {
            return Err(Error::Shape(format!(
                "word table width {} but config expects {}",
                words.ncols(),
                config.word_dim
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feature_tables = config
            .features
            .iter()
            .map(|f| Array2::from_shape_simple_fn((f.cardinality, f.dim), || rng.random_range(-0.05..0.05)))
            .collect();
        let d_in = config.input_dim();
        let fwd = LstmParams::init(d_in, config.hidden, &mut rng);
        let bwd = match config.encoder {
            EncoderKind::Lstm => None,
            EncoderKind::Bilstm => Some(LstmParams::init(d_in, config.hidden, &mut rng)),
        };
        let proj = Linear::init(config.encoder_dim(), config.labels.len(), &mut rng);
        let crf = CrfParams::zeros(config.labels.len());
        let word_table = config.finetune_words.then(|| words.clone());
        Ok(SequenceLabeler {
            params: LabelerParams {
                word_table,
                feature_tables,
                fwd,
                bwd,
                proj,
                crf,
            },
            config,
        })
    }

    pub fn num_labels(&self) -> usize {
        self.config.labels.len()
    }

    fn word_table<'a>(&'a self, shared: &'a Array2<f64>) -> &'a Array2<f64> {
        self.params.word_table.as_ref().unwrap_or(shared)
    }

    fn check_input(&self, words: &Array2<f64>, input: &SequenceInput) -> Result<()> {
        if input.is_empty() {
            return Err(Error::Shape("empty token sequence".into()));
        }
        if input.features.len() != self.config.features.len() {
            return Err(Error::Config(format!(
                "model expects {} feature sequences, got {}",
                self.config.features.len(),
                input.features.len()
            )));
        }
        let table = self.word_table(words);
        if table.ncols() != self.config.word_dim {
            return Err(Error::Shape("word table width mismatch".into()));
        }
        if let Some(&w) = input.words.iter().find(|&&w| w >= table.nrows()) {
            return Err(Error::Shape(format!("word id {w} outside table")));
        }
        for (spec, ids) in self.config.features.iter().zip(&input.features) {
            if ids.len() != input.len() {
                return Err(Error::Shape(format!(
                    "feature `{}` has {} entries for {} tokens",
                    spec.name,
                    ids.len(),
                    input.len()
                )));
            }
            if let Some(&bad) = ids.iter().find(|&&i| i >= spec.cardinality) {
                return Err(Error::Label(format!("feature `{}` id {bad} out of range", spec.name)));
            }
        }
        Ok(())
    }

    /// Per-token concatenation `word | feature_1 | feature_2 | ...`.
    pub fn build_inputs(&self, words: &Array2<f64>, input: &SequenceInput) -> Result<Array2<f64>> {
        self.check_input(words, input)?;
        let table = self.word_table(words);
        let mut x = Array2::zeros((input.len(), self.config.input_dim()));
        for (t, &w) in input.words.iter().enumerate() {
            x.slice_mut(s![t, ..self.config.word_dim]).assign(&table.row(w));
        }
        let mut col = self.config.word_dim;
        for ((spec, table), ids) in self
            .config
            .features
            .iter()
            .zip(&self.params.feature_tables)
            .zip(&input.features)
        {
            for (t, &id) in ids.iter().enumerate() {
                x.slice_mut(s![t, col..col + spec.dim]).assign(&table.row(id));
            }
            col += spec.dim;
        }
        Ok(x)
    }

    fn forward(&self, x: Array2<f64>, dropout_seed: Option<u64>) -> Result<Forward> {
        let (encoded, cache) = match &self.params.bwd {
            None => {
                let c = lstm_forward(&self.params.fwd, x.view())?;
                (c.h.clone(), EncoderCache::Uni(c))
            }
            Some(bwd) => {
                let (out, c) = bilstm_forward(&self.params.fwd, bwd, x.view())?;
                (out, EncoderCache::Bi(c))
            }
        };
        let (dropped, mask) = match dropout_seed {
            Some(seed) => dropout(encoded.view(), self.config.dropout, seed, true),
            None => (encoded, None),
        };
        let emissions = self.params.proj.forward(dropped.view());
        Ok(Forward {
            encoded: dropped,
            mask,
            emissions,
            cache,
            x,
        })
    }

    /// Label scores for every token (inference mode).
    pub fn emissions(&self, words: &Array2<f64>, input: &SequenceInput) -> Result<Array2<f64>> {
        let x = self.build_inputs(words, input)?;
        Ok(self.forward(x, None)?.emissions)
    }

    /// Viterbi labels with per-token marginal confidences.
    pub fn predict(&self, words: &Array2<f64>, input: &SequenceInput) -> Result<Prediction> {
        let em = self.emissions(words, input)?;
        let (labels, _) = self.params.crf.viterbi(em.view());
        let marginals = self.params.crf.marginals(em.view());
        let confidences = labels.iter().enumerate().map(|(t, &y)| marginals[[t, y]]).collect();
        Ok(Prediction {
            labels,
            confidences,
            marginals,
        })
    }

    /// CRF negative log-likelihood of `gold` and the gradient of every
    /// parameter. `dropout_seed = None` disables dropout.
    pub fn loss_and_grad(
        &self,
        words: &Array2<f64>,
        example: &Example,
        dropout_seed: Option<u64>,
    ) -> Result<(f64, LabelerParams)> {
        let x = self.build_inputs(words, &example.input)?;
        let fwd = self.forward(x, dropout_seed)?;
        let crf_loss = self.params.crf.nll_grad(fwd.emissions.view(), &example.gold)?;

        let mut grad = self.params.zeros_like();
        grad.crf = crf_loss.grad;
        let (proj_grad, mut d_enc) = self
            .params
            .proj
            .backward(fwd.encoded.view(), crf_loss.d_emissions.view());
        grad.proj = proj_grad;
        if let Some(mask) = &fwd.mask {
            d_enc *= mask;
        }

        let dx_start = if self.params.word_table.is_some() {
            0
        } else {
            self.config.word_dim
        };
        let dx_cols = dx_start..self.config.input_dim();
        let dx = match (&fwd.cache, &self.params.bwd) {
            (EncoderCache::Uni(c), _) => {
                let (g, dx) = bptt_backward(&self.params.fwd, c, d_enc.view(), dx_cols);
                grad.fwd = g;
                dx
            }
            (EncoderCache::Bi(c), Some(bwd)) => {
                let (gf, gb, dx) = bilstm_backward(&self.params.fwd, bwd, c, d_enc.view(), dx_cols);
                grad.fwd = gf;
                grad.bwd = Some(gb);
                dx
            }
            (EncoderCache::Bi(_), None) => unreachable!("bidirectional cache without backward LSTM"),
        };
        debug_assert_eq!(fwd.x.nrows(), dx.nrows());

        // Scatter input gradients into the embedding tables.
        let mut col = 0;
        if let Some(wg) = &mut grad.word_table {
            for (t, &w) in example.input.words.iter().enumerate() {
                let mut row = wg.row_mut(w);
                row += &dx.slice(s![t, ..self.config.word_dim]);
            }
            col = self.config.word_dim;
        }
        for ((spec, tg), ids) in self
            .config
            .features
            .iter()
            .zip(&mut grad.feature_tables)
            .zip(&example.input.features)
        {
            for (t, &id) in ids.iter().enumerate() {
                let mut row = tg.row_mut(id);
                row += &dx.slice(s![t, col..col + spec.dim]);
            }
            col += spec.dim;
        }
        Ok((crf_loss.loss, grad))
    }

    /// Token accuracy over `examples` in inference mode.
    pub fn accuracy(&self, words: &Array2<f64>, examples: &[Example]) -> Result<f64> {
        let results: Vec<Result<(usize, usize)>> = examples
            .par_iter()
            .map(|ex| {
                let p = self.predict(words, &ex.input)?;
                let ok = p.labels.iter().zip(&ex.gold).filter(|(a, b)| a == b).count();
                Ok((ok, ex.gold.len()))
            })
            .collect();
        let (mut ok, mut total) = (0, 0);
        for r in results {
            let (a, b) = r?;
            ok += a;
            total += b;
        }
        Ok(if total == 0 { 0.0 } else { ok as f64 / total as f64 })
    }

    /// Mini-batch RMSprop on the mean CRF loss. When `dev` is non-empty the
    /// parameters of the best dev-accuracy epoch are kept.
    pub fn train(
        &mut self,
        words: &Array2<f64>,
        train: &[Example],
        dev: &[Example],
        cfg: &TrainConfig,
    ) -> Result<TrainReport> {
        self.train_with(words, train, dev, cfg, |_| false)
    }

    /// Like [`train`](Self::train) but stops early once `stop(stats)` holds
    /// after an epoch.
    pub fn train_with(
        &mut self,
        words: &Array2<f64>,
        train: &[Example],
        dev: &[Example],
        cfg: &TrainConfig,
        mut stop: impl FnMut(&EpochStats) -> bool,
    ) -> Result<TrainReport> {
        if train.is_empty() {
            return Err(Error::Config("empty training set".into()));
        }
        if cfg.batch_size == 0 || cfg.max_epochs == 0 {
            return Err(Error::Config("batch size and epoch budget must be positive".into()));
        }
        for (i, ex) in train.iter().enumerate() {
            if let Some(&bad) = ex.gold.iter().find(|&&y| y >= self.num_labels()) {
                return Err(Error::Label(format!("sentence {i}: label id {bad} outside label set")));
            }
        }
        let mut opt = Rmsprop::new(cfg.lr, cfg.rho, cfg.eps);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut epochs = Vec::new();
        let mut best: Option<(f64, usize, LabelerParams)> = None;
        let mut since_best = 0;

        for epoch in 1..=cfg.max_epochs {
            order.shuffle(&mut rng);
            let mut loss_sum = 0.0;
            for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
                let parts: Vec<Result<(f64, LabelerParams)>> = batch
                    .par_chunks(GRAD_CHUNK)
                    .map(|chunk| {
                        let mut acc: Option<(f64, LabelerParams)> = None;
                        for &i in chunk {
                            let seed = mix_seed(cfg.seed, epoch as u64, (b * cfg.batch_size) as u64, i as u64);
                            let (l, g) = self.loss_and_grad(words, &train[i], Some(seed))?;
                            match &mut acc {
                                None => acc = Some((l, g)),
                                Some((al, ag)) => {
                                    *al += l;
                                    ag.accumulate(&g);
                                }
                            }
                        }
                        Ok(acc.expect("non-empty chunk"))
                    })
                    .collect();
                let mut total: Option<(f64, LabelerParams)> = None;
                for p in parts {
                    let (l, g) = p?;
                    match &mut total {
                        None => total = Some((l, g)),
                        Some((tl, tg)) => {
                            *tl += l;
                            tg.accumulate(&g);
                        }
                    }
                }
                let (l, mut g) = total.expect("non-empty batch");
                loss_sum += l;
                g.scale(1.0 / batch.len() as f64);
                opt.step(self.params.tensors_mut(), g.tensors());
            }
            if !self.params.all_finite() {
                return Err(Error::Invariant(format!("non-finite parameters after epoch {epoch}")));
            }
            let dev_accuracy = if dev.is_empty() {
                None
            } else {
                Some(self.accuracy(words, dev)?)
            };
            let stats = EpochStats {
                epoch,
                train_loss: loss_sum / train.len() as f64,
                dev_accuracy,
            };
            let halt = stop(&stats);
            epochs.push(stats);

            if let Some(acc) = dev_accuracy {
                if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                    best = Some((acc, epoch, self.params.clone()));
                    since_best = 0;
                } else {
                    since_best += 1;
                }
                if cfg.patience.is_some_and(|p| since_best >= p) {
                    break;
                }
            }
            if halt {
                break;
            }
        }

        let best_epoch = match best {
            Some((_, epoch, params)) => {
                self.params = params;
                epoch
            }
            None => epochs.len(),
        };
        Ok(TrainReport { epochs, best_epoch })
    }

    /// SHA-256 over every parameter value, in tensor order.
    pub fn param_hash(&self) -> String {
        let mut h = Sha256::new();
        for t in self.params.tensors() {
            for v in t {
                h.update(v.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// Writes `FQPM`, the format version, a JSON header (layer spec plus
    /// `extra` stage metadata), then every tensor as a `u64` length followed
    /// by little-endian `f64` values.
    pub fn save(&self, path: &Path, extra: &serde_json::Value) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = serde_json::to_vec(&ModelHeader {
            config: self.config.clone(),
            shapes: self.shapes(),
            extra: extra.clone(),
        })?;
        let io = |e| Error::io(path, e);
        w.write_all(MODEL_MAGIC).map_err(io)?;
        w.write_all(&MODEL_VERSION.to_le_bytes()).map_err(io)?;
        w.write_all(&(header.len() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&header).map_err(io)?;
        for t in self.params.tensors() {
            w.write_all(&(t.len() as u64).to_le_bytes()).map_err(io)?;
            for v in t {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    /// Reads a model written by [`save`](Self::save), returning it with the
    /// stored `extra` metadata.
    pub fn load(path: &Path) -> Result<(Self, serde_json::Value)> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let io = |e| Error::io(path, e);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MODEL_MAGIC {
            return Err(Error::Format(format!("{} is not a model file", path.display())));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(io)?;
        let version = u32::from_le_bytes(b4);
        if version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "model version {version}, expected {MODEL_VERSION}"
            )));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(io)?;
        let mut header = vec![0u8; u64::from_le_bytes(b8) as usize];
        r.read_exact(&mut header).map_err(io)?;
        let header: ModelHeader = serde_json::from_slice(&header)?;

        let mut shapes = header.shapes.iter();
        let mut next = |what: &str| -> Result<Array2<f64>> {
            let &(rows, cols) = shapes
                .next()
                .ok_or_else(|| Error::Format(format!("missing shape for {what}")))?;
            let mut b8 = [0u8; 8];
            r.read_exact(&mut b8).map_err(io)?;
            let len = u64::from_le_bytes(b8) as usize;
            if len != rows * cols {
                return Err(Error::Format(format!("{what}: {len} values for shape {rows}x{cols}")));
            }
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut b8).map_err(io)?;
                data.push(f64::from_le_bytes(b8));
            }
            Ok(Array2::from_shape_vec((rows, cols), data).expect("checked length"))
        };
        let cfg = &header.config;
        let word_table = if cfg.finetune_words {
            Some(next("word table")?)
        } else {
            None
        };
        let feature_tables = cfg.features.iter().map(|f| next(&f.name)).collect::<Result<Vec<_>>>()?;
        let mut lstm = |what: &str| -> Result<LstmParams> {
            let w = next(what)?;
            let u = next(what)?;
            let b = next(what)?
                .into_shape_with_order(cfg.hidden * 4)
                .map_err(|e| Error::Format(e.to_string()))?;
            let p = LstmParams { w, u, b };
            p.check()?;
            Ok(p)
        };
        let fwd = lstm("forward LSTM")?;
        let bwd = match cfg.encoder {
            EncoderKind::Lstm => None,
            EncoderKind::Bilstm => Some(lstm("backward LSTM")?),
        };
        let flat = |a: Array2<f64>| {
            let n = a.len();
            a.into_shape_with_order(n).expect("contiguous")
        };
        let proj = Linear {
            w: next("projection")?,
            b: flat(next("projection bias")?),
        };
        let crf = CrfParams {
            transitions: next("transitions")?,
            start: flat(next("start")?),
            stop: flat(next("stop")?),
        };
        let mut rest = Vec::new();
        r.read_to_end(&mut rest).map_err(io)?;
        if !rest.is_empty() {
            return Err(Error::Format("trailing bytes after parameters".into()));
        }
        let model = SequenceLabeler {
            config: header.config,
            params: LabelerParams {
                word_table,
                feature_tables,
                fwd,
                bwd,
                proj,
                crf,
            },
        };
        if model.shapes() != header.shapes {
            return Err(Error::Format("parameter shapes disagree with header".into()));
        }
        Ok((model, header.extra))
    }

    fn shapes(&self) -> Vec<(usize, usize)> {
        let p = &self.params;
        let mut v = Vec::new();
        if let Some(w) = &p.word_table {
            v.push(w.dim());
        }
        v.extend(p.feature_tables.iter().map(|t| t.dim()));
        let lstm = |l: &LstmParams, v: &mut Vec<(usize, usize)>| {
            v.push(l.w.dim());
            v.push(l.u.dim());
            v.push((1, l.b.len()));
        };
        lstm(&p.fwd, &mut v);
        if let Some(b) = &p.bwd {
            lstm(b, &mut v);
        }
        v.push(p.proj.w.dim());
        v.push((1, p.proj.b.len()));
        v.push(p.crf.transitions.dim());
        v.push((1, p.crf.start.len()));
        v.push((1, p.crf.stop.len()));
        v
    }
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    config: LabelerConfig,
    shapes: Vec<(usize, usize)>,
    extra: serde_json::Value,
}

/// splitmix64-style mixing of several seed components.
pub(crate) fn mix_seed(a: u64, b: u64, c: u64, d: u64) -> u64 {
    let mut z = a;
    for v in [b, c, d] {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(v);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}
