//! Part-of-speech tagging stage: an LSTM-CRF over frozen word vectors.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedSentence, PosTagSet, Token};
use crate::embeddings::WordVectors;
use crate::error::{Error, Result};
use crate::labeler::{EncoderKind, Example, LabelerConfig, SequenceInput, SequenceLabeler, TrainConfig, TrainReport};
use crate::metrics::{compute_metrics, Metrics};

pub const STAGE: &str = "pos";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PosConfig {
    pub encoder: EncoderKind,
    pub hidden: usize,
    pub dropout: f64,
    pub finetune_words: bool,
    pub train: TrainConfig,
}

impl Default for PosConfig {
    fn default() -> Self {
        PosConfig {
            encoder: EncoderKind::Lstm,
            hidden: 100,
            dropout: 0.5,
            finetune_words: false,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub token: String,
    pub pos: String,
    /// Marginal probability of `pos` at this position.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosModel {
    pub labeler: SequenceLabeler,
    pub tagset: PosTagSet,
}

/// Label ids for `tags`; errors name the sentence index when one is given.
pub(crate) fn pos_ids(tagset: &PosTagSet, tags: &[String], sentence: Option<usize>) -> Result<Vec<usize>> {
    tags.iter()
        .map(|t| {
            tagset.index_of(t).ok_or_else(|| {
                let at = sentence.map(|i| format!("sentence {i}: ")).unwrap_or_default();
                Error::Label(format!("{at}PoS label `{t}` not in tagset"))
            })
        })
        .collect()
}

fn examples(sentences: &[AnnotatedSentence], vectors: &WordVectors, tagset: &PosTagSet) -> Result<Vec<Example>> {
    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(Example {
                input: SequenceInput {
                    words: vectors.ids(&s.tokens),
                    features: Vec::new(),
                },
                gold: pos_ids(tagset, &s.pos, Some(i))?,
            })
        })
        .collect()
}

pub fn train_pos(
    train: &[AnnotatedSentence],
    dev: &[AnnotatedSentence],
    vectors: &WordVectors,
    tagset: &PosTagSet,
    cfg: &PosConfig,
) -> Result<(PosModel, TrainReport)> {
    let train_ex = examples(train, vectors, tagset)?;
    let dev_ex = examples(dev, vectors, tagset)?;
    let config = LabelerConfig {
        stage: STAGE.into(),
        encoder: cfg.encoder,
        hidden: cfg.hidden,
        dropout: cfg.dropout,
        word_dim: vectors.dim(),
        finetune_words: cfg.finetune_words,
        features: Vec::new(),
        labels: tagset.labels().to_vec(),
    };
    let mut labeler = SequenceLabeler::new(config, vectors.matrix(), cfg.train.seed)?;
    let report = labeler.train(vectors.matrix(), &train_ex, &dev_ex, &cfg.train)?;
    Ok((
        PosModel {
            labeler,
            tagset: tagset.clone(),
        },
        report,
    ))
}

impl PosModel {
    /// Viterbi tags with marginal confidences. Unknown words use the UNK row.
    pub fn tag(&self, vectors: &WordVectors, tokens: &[Token]) -> Result<Vec<TaggedToken>> {
        let input = SequenceInput {
            words: vectors.ids(tokens),
            features: Vec::new(),
        };
        let p = self.labeler.predict(vectors.matrix(), &input)?;
        Ok(tokens
            .iter()
            .zip(p.labels.iter().zip(&p.confidences))
            .map(|(t, (&y, &c))| TaggedToken {
                token: t.as_str().to_string(),
                pos: self.tagset.label(y).to_string(),
                confidence: c,
            })
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.labeler.save(path, &serde_json::Value::Null)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (labeler, _) = SequenceLabeler::load(path)?;
        if labeler.config.stage != STAGE {
            return Err(Error::Format(format!(
                "{} holds a `{}` model, expected `{STAGE}`",
                path.display(),
                labeler.config.stage
            )));
        }
        let tagset = PosTagSet::from_labels(labeler.config.labels.clone())?;
        Ok(PosModel { labeler, tagset })
    }
}

/// Where downstream stages take PoS tags from.
#[derive(Debug, Clone, Copy)]
pub enum PosSource<'a> {
    Gold,
    Tagger(&'a PosModel),
}

impl PosSource<'_> {
    pub fn tags(&self, vectors: &WordVectors, sentence: &AnnotatedSentence) -> Result<Vec<String>> {
        match self {
            PosSource::Gold => Ok(sentence.pos.clone()),
            PosSource::Tagger(m) => Ok(m.tag(vectors, &sentence.tokens)?.into_iter().map(|t| t.pos).collect()),
        }
    }
}

/// Token accuracy and F1 over the 20-label tagset.
pub fn eval_pos(model: &PosModel, vectors: &WordVectors, test: &[AnnotatedSentence]) -> Result<Metrics> {
    let pairs: Vec<Result<(Vec<usize>, Vec<usize>)>> = test
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let gold = pos_ids(&model.tagset, &s.pos, Some(i))?;
            let pred = model
                .tag(vectors, &s.tokens)?
                .iter()
                .map(|t| model.tagset.index_of(&t.pos).expect("model label"))
                .collect();
            Ok((gold, pred))
        })
        .collect();
    let (mut gold, mut pred) = (Vec::new(), Vec::new());
    for p in pairs {
        let (g, q) = p?;
        gold.extend(g);
        pred.extend(q);
    }
    compute_metrics(&gold, &pred, model.tagset.labels())
}
