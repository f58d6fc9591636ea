//! Entity recognition stage: an LSTM-CRF over word vectors concatenated with
//! learned PoS and operation-label embeddings.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedSentence, NerTag, PosTagSet, Token};
use crate::dep::{DpModel, OpLabel};
use crate::embeddings::WordVectors;
use crate::error::{Error, Result};
use crate::labeler::{
    EncoderKind, Example, FeatureSpec, LabelerConfig, SequenceInput, SequenceLabeler, TrainConfig, TrainReport,
};
use crate::metrics::{compute_metrics, Metrics};
use crate::pos::{pos_ids, PosModel};

pub const STAGE: &str = "ner";

/// Which upstream annotations are concatenated to the word vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureConfig {
    #[serde(rename = "WORD")]
    Word,
    #[serde(rename = "WORD+POS")]
    WordPos,
    #[serde(rename = "WORD+POS+DP")]
    WordPosDp,
}

impl FeatureConfig {
    pub const ALL: [FeatureConfig; 3] = [FeatureConfig::Word, FeatureConfig::WordPos, FeatureConfig::WordPosDp];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureConfig::Word => "WORD",
            FeatureConfig::WordPos => "WORD+POS",
            FeatureConfig::WordPosDp => "WORD+POS+DP",
        }
    }

    pub fn uses_pos(self) -> bool {
        self != FeatureConfig::Word
    }

    pub fn uses_ops(self) -> bool {
        self == FeatureConfig::WordPosDp
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureConfig::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown feature config `{s}` (word, word+pos, word+pos+dp)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NerConfig {
    pub features: FeatureConfig,
    pub encoder: EncoderKind,
    pub hidden: usize,
    pub d_pos: usize,
    pub d_op: usize,
    pub dropout: f64,
    pub finetune_words: bool,
    pub train: TrainConfig,
}

impl Default for NerConfig {
    fn default() -> Self {
        NerConfig {
            features: FeatureConfig::WordPosDp,
            encoder: EncoderKind::Lstm,
            hidden: 100,
            d_pos: 25,
            d_op: 8,
            dropout: 0.5,
            finetune_words: false,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityResult {
    pub token: String,
    pub label: NerTag,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NerModel {
    pub labeler: SequenceLabeler,
    pub tagset: PosTagSet,
    pub features: FeatureConfig,
}

fn feature_specs(cfg: &NerConfig, tagset: &PosTagSet) -> Vec<FeatureSpec> {
    let mut v = Vec::new();
    if cfg.features.uses_pos() {
        v.push(FeatureSpec {
            name: "pos".into(),
            cardinality: tagset.len(),
            dim: cfg.d_pos,
        });
    }
    if cfg.features.uses_ops() {
        v.push(FeatureSpec {
            name: "op".into(),
            cardinality: OpLabel::ALL.len(),
            dim: cfg.d_op,
        });
    }
    v
}

impl NerModel {
    fn input(
        &self,
        vectors: &WordVectors,
        tokens: &[Token],
        pos: Option<&[String]>,
        ops: Option<&[OpLabel]>,
        sentence: Option<usize>,
    ) -> Result<SequenceInput> {
        let mut features = Vec::new();
        if self.features.uses_pos() {
            let pos = pos.ok_or_else(|| Error::Config(format!("{} needs PoS tags", self.features)))?;
            if pos.len() != tokens.len() {
                return Err(Error::Shape(format!(
                    "{} PoS tags for {} tokens",
                    pos.len(),
                    tokens.len()
                )));
            }
            features.push(pos_ids(&self.tagset, pos, sentence)?);
        }
        if self.features.uses_ops() {
            let ops = ops.ok_or_else(|| Error::Config(format!("{} needs operation labels", self.features)))?;
            if ops.len() != tokens.len() {
                return Err(Error::Shape(format!(
                    "{} operation labels for {} tokens",
                    ops.len(),
                    tokens.len()
                )));
            }
            features.push(ops.iter().map(|o| o.index()).collect());
        }
        Ok(SequenceInput {
            words: vectors.ids(tokens),
            features,
        })
    }

    /// Per-token input vectors, `word | pos | op` with absent parts omitted.
    pub fn build_features(
        &self,
        vectors: &WordVectors,
        tokens: &[Token],
        pos: Option<&[String]>,
        ops: Option<&[OpLabel]>,
    ) -> Result<Array2<f64>> {
        let input = self.input(vectors, tokens, pos, ops, None)?;
        self.labeler.build_inputs(vectors.matrix(), &input)
    }

    pub fn recognize(
        &self,
        vectors: &WordVectors,
        tokens: &[Token],
        pos: Option<&[String]>,
        ops: Option<&[OpLabel]>,
    ) -> Result<Vec<EntityResult>> {
        let input = self.input(vectors, tokens, pos, ops, None)?;
        let p = self.labeler.predict(vectors.matrix(), &input)?;
        Ok(tokens
            .iter()
            .zip(p.labels.iter().zip(&p.confidences))
            .map(|(t, (&y, &c))| EntityResult {
                token: t.as_str().to_string(),
                label: NerTag::from_index(y).expect("five entity labels"),
                confidence: c,
            })
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.labeler.save(
            path,
            &serde_json::json!({ "pos_labels": self.tagset.labels(), "features": self.features }),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (labeler, extra) = SequenceLabeler::load(path)?;
        if labeler.config.stage != STAGE {
            return Err(Error::Format(format!(
                "{} holds a `{}` model, expected `{STAGE}`",
                path.display(),
                labeler.config.stage
            )));
        }
        let labels: Vec<String> = serde_json::from_value(extra["pos_labels"].clone())?;
        let features: FeatureConfig = serde_json::from_value(extra["features"].clone())?;
        Ok(NerModel {
            labeler,
            tagset: PosTagSet::from_labels(labels)?,
            features,
        })
    }
}

/// Trains on gold PoS and operation features.
pub fn train_ner(
    train: &[AnnotatedSentence],
    dev: &[AnnotatedSentence],
    vectors: &WordVectors,
    tagset: &PosTagSet,
    cfg: &NerConfig,
) -> Result<(NerModel, TrainReport)> {
    let config = LabelerConfig {
        stage: STAGE.into(),
        encoder: cfg.encoder,
        hidden: cfg.hidden,
        dropout: cfg.dropout,
        word_dim: vectors.dim(),
        finetune_words: cfg.finetune_words,
        features: feature_specs(cfg, tagset),
        labels: NerTag::names(),
    };
    let mut model = NerModel {
        labeler: SequenceLabeler::new(config, vectors.matrix(), cfg.train.seed)?,
        tagset: tagset.clone(),
        features: cfg.features,
    };
    let to_examples = |set: &[AnnotatedSentence]| -> Result<Vec<Example>> {
        set.iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(Example {
                    input: model.input(vectors, &s.tokens, Some(&s.pos), Some(&s.op), Some(i))?,
                    gold: s.ner.iter().map(|t| t.index()).collect(),
                })
            })
            .collect()
    };
    let (train_ex, dev_ex) = (to_examples(train)?, to_examples(dev)?);
    let report = model.labeler.train(vectors.matrix(), &train_ex, &dev_ex, &cfg.train)?;
    Ok((model, report))
}

/// Where NER takes its upstream features from.
#[derive(Debug, Clone, Copy)]
pub enum Upstream<'a> {
    Gold,
    Models { pos: &'a PosModel, dp: &'a DpModel },
}

impl Upstream<'_> {
    pub fn features(&self, vectors: &WordVectors, sentence: &AnnotatedSentence) -> Result<(Vec<String>, Vec<OpLabel>)> {
        match *self {
            Upstream::Gold => Ok((sentence.pos.clone(), sentence.op.clone())),
            Upstream::Models { pos, dp } => {
                let tags: Vec<String> = pos.tag(vectors, &sentence.tokens)?.into_iter().map(|t| t.pos).collect();
                let parse = dp.parse_deps(vectors, &sentence.tokens, Some(&tags))?;
                Ok((tags, parse.ops.into_iter().map(|o| o.label).collect()))
            }
        }
    }
}

pub fn eval_ner(
    model: &NerModel,
    vectors: &WordVectors,
    test: &[AnnotatedSentence],
    upstream: Upstream<'_>,
) -> Result<Metrics> {
    let pairs: Vec<Result<Vec<usize>>> = test
        .par_iter()
        .map(|s| {
            let (pos, ops) = if model.features == FeatureConfig::Word {
                (Vec::new(), Vec::new())
            } else {
                upstream.features(vectors, s)?
            };
            Ok(model
                .recognize(vectors, &s.tokens, Some(&pos), Some(&ops))?
                .iter()
                .map(|e| e.label.index())
                .collect())
        })
        .collect();
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for (s, p) in test.iter().zip(pairs) {
        gold.extend(s.ner.iter().map(|t| t.index()));
        pred.extend(p?);
    }
    compute_metrics(&gold, &pred, &NerTag::names())
}
