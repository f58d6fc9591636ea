//! Dependency stage: a BiLSTM-CRF predicting one operation label per token,
//! decoded into a tree by the greedy executor.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transition::{labels_to_tree, OpLabel};
use crate::corpus::{AnnotatedSentence, PosTagSet, Token};
use crate::embeddings::WordVectors;
use crate::error::{Error, Result};
use crate::labeler::{
    EncoderKind, Example, FeatureSpec, LabelerConfig, SequenceInput, SequenceLabeler, TrainConfig, TrainReport,
};
use crate::metrics::{compute_metrics, Metrics};
use crate::pos::{pos_ids, PosSource};

pub const STAGE: &str = "dp";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DpConfig {
    pub encoder: EncoderKind,
    /// Units per direction.
    pub hidden: usize,
    /// Feed PoS tags as a learned feature; off for the word-only baseline.
    pub use_pos: bool,
    pub d_pos: usize,
    pub dropout: f64,
    pub finetune_words: bool,
    pub train: TrainConfig,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            encoder: EncoderKind::Bilstm,
            hidden: 200,
            use_pos: true,
            d_pos: 25,
            dropout: 0.5,
            finetune_words: false,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpModel {
    pub labeler: SequenceLabeler,
    pub tagset: PosTagSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpPrediction {
    pub label: OpLabel,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepParse {
    pub ops: Vec<OpPrediction>,
    pub heads: Vec<i32>,
    /// The executor had to force-attach tokens the labels left dangling.
    pub repaired: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpMetrics {
    pub ops: Metrics,
    /// Unlabelled attachment score of the reconstructed trees.
    pub uas: f64,
}

impl DpModel {
    pub fn uses_pos(&self) -> bool {
        !self.labeler.config.features.is_empty()
    }

    fn input(&self, vectors: &WordVectors, tokens: &[Token], pos: Option<&[String]>) -> Result<SequenceInput> {
        let features = if self.uses_pos() {
            let pos = pos.ok_or_else(|| Error::Config("dependency model needs PoS features".into()))?;
            if pos.len() != tokens.len() {
                return Err(Error::Shape(format!(
                    "{} PoS tags for {} tokens",
                    pos.len(),
                    tokens.len()
                )));
            }
            vec![pos_ids(&self.tagset, pos, None)?]
        } else {
            Vec::new()
        };
        Ok(SequenceInput {
            words: vectors.ids(tokens),
            features,
        })
    }

    /// Viterbi operation labels with marginal confidences, and the tree they
    /// decode to. `pos` is ignored by word-only models.
    pub fn parse_deps(&self, vectors: &WordVectors, tokens: &[Token], pos: Option<&[String]>) -> Result<DepParse> {
        let input = self.input(vectors, tokens, pos)?;
        let p = self.labeler.predict(vectors.matrix(), &input)?;
        let labels: Vec<OpLabel> = p
            .labels
            .iter()
            .map(|&y| OpLabel::from_index(y).expect("four operation labels"))
            .collect();
        let rec = labels_to_tree(&labels);
        Ok(DepParse {
            ops: labels
                .into_iter()
                .zip(p.confidences)
                .map(|(label, confidence)| OpPrediction { label, confidence })
                .collect(),
            heads: rec.heads,
            repaired: rec.repaired,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.labeler
            .save(path, &serde_json::json!({ "pos_labels": self.tagset.labels() }))
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
        Ok(DpModel {
            labeler,
            tagset: PosTagSet::from_labels(labels)?,
        })
    }
}

/// Trains on gold PoS features.
pub fn train_dp(
    train: &[AnnotatedSentence],
    dev: &[AnnotatedSentence],
    vectors: &WordVectors,
    tagset: &PosTagSet,
    cfg: &DpConfig,
) -> Result<(DpModel, TrainReport)> {
    let features = if cfg.use_pos {
        vec![FeatureSpec {
            name: "pos".into(),
            cardinality: tagset.len(),
            dim: cfg.d_pos,
        }]
    } else {
        Vec::new()
    };
    let config = LabelerConfig {
        stage: STAGE.into(),
        encoder: cfg.encoder,
        hidden: cfg.hidden,
        dropout: cfg.dropout,
        word_dim: vectors.dim(),
        finetune_words: cfg.finetune_words,
        features,
        labels: OpLabel::names(),
    };
    let labeler = SequenceLabeler::new(config, vectors.matrix(), cfg.train.seed)?;
    let mut model = DpModel {
        labeler,
        tagset: tagset.clone(),
    };
    let to_examples = |set: &[AnnotatedSentence]| -> Result<Vec<Example>> {
        set.iter()
            .enumerate()
            .map(|(i, s)| {
                let features = if cfg.use_pos {
                    vec![pos_ids(tagset, &s.pos, Some(i))?]
                } else {
                    Vec::new()
                };
                Ok(Example {
                    input: SequenceInput {
                        words: vectors.ids(&s.tokens),
                        features,
                    },
                    gold: s.op.iter().map(|o| o.index()).collect(),
                })
            })
            .collect()
    };
    let (train_ex, dev_ex) = (to_examples(train)?, to_examples(dev)?);
    let report = model.labeler.train(vectors.matrix(), &train_ex, &dev_ex, &cfg.train)?;
    Ok((model, report))
}

/// Operation-label metrics plus UAS, with PoS features from `pos`.
pub fn eval_dp(
    model: &DpModel,
    vectors: &WordVectors,
    test: &[AnnotatedSentence],
    pos: PosSource<'_>,
) -> Result<DpMetrics> {
    let parsed: Vec<Result<DepParse>> = test
        .par_iter()
        .map(|s| {
            let tags = if model.uses_pos() {
                Some(pos.tags(vectors, s)?)
            } else {
                None
            };
            model.parse_deps(vectors, &s.tokens, tags.as_deref())
        })
        .collect();
    let (mut gold, mut pred) = (Vec::new(), Vec::new());
    let (mut attached, mut total) = (0usize, 0usize);
    for (s, p) in test.iter().zip(parsed) {
        let p = p?;
        gold.extend(s.op.iter().map(|o| o.index()));
        pred.extend(p.ops.iter().map(|o| o.label.index()));
        attached += s.head.iter().zip(&p.heads).filter(|(a, b)| a == b).count();
        total += s.len();
    }
    Ok(DpMetrics {
        ops: compute_metrics(&gold, &pred, &OpLabel::names())?,
        uas: if total == 0 {
            0.0
        } else {
            attached as f64 / total as f64
        },
    })
}
