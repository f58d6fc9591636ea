//! Sequential stage training with weight freezing, the model bundle, and
//! end-to-end query parsing.

mod bundle;
mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use bundle::{
    file_sha256, parse_query, Manifest, ManifestEntry, ModelBundle, QueryAnalysis, Scored, TokenAnalysis, DP_FILE,
    EMBEDDINGS_FILE, MANIFEST_FILE, MANIFEST_VERSION, NER_FILE, POS_FILE, REPORT_FILE, TEST_FILE,
};
pub use report::{
    export_report, load_report, table_path, CorpusSummary, FreezeCheck, NerResult, PipelineReport, ReportRow,
    StageResult,
};

use crate::corpus::{
    fashion_templates, generate_corpus, load_corpus, load_templates, save_corpus, split_dataset, AnnotatedSentence,
    Lexicon, PosTagSet, Token,
};
use crate::dep::{eval_dp, train_dp, DpConfig, DpModel};
use crate::embeddings::{build_vocab, train_skipgram, SkipGramConfig, WordVectors};
use crate::error::{Error, Result};
use crate::ner::{eval_ner, train_ner, FeatureConfig, NerConfig, Upstream};
use crate::pos::{eval_pos, train_pos, PosConfig, PosModel, PosSource};
pub use report::model_name;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    /// Existing JSONL corpus; generated from templates when absent.
    pub path: Option<PathBuf>,
    pub size: usize,
    pub seed: u64,
    pub lexicon: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub tagset: Option<PathBuf>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            path: None,
            size: 10_000,
            seed: 1,
            lexicon: None,
            templates: None,
            tagset: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    /// Train share of the corpus; the rest is the test set.
    pub train_ratio: f64,
    /// Share of the training portion held out for early stopping; 0 disables.
    pub dev_ratio: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_ratio: 0.9,
            dev_ratio: 0.1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub corpus: CorpusConfig,
    pub split: SplitConfig,
    pub embeddings: SkipGramConfig,
    pub pos: PosConfig,
    pub dp: DpConfig,
    /// `ner.features` selects the bundled model.
    pub ner: NerConfig,
    /// Also train and report the other NER feature configurations.
    pub ner_ablation: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: CorpusConfig::default(),
            split: SplitConfig::default(),
            embeddings: SkipGramConfig::default(),
            pos: PosConfig::default(),
            dp: DpConfig::default(),
            ner: NerConfig::default(),
            ner_ablation: true,
        }
    }
}

impl PipelineConfig {
    /// Reads a JSON config; missing fields keep their defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Sets every stage seed from one value.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.corpus.seed = seed;
        self.split.seed = seed;
        self.embeddings.seed = seed;
        self.pos.train.seed = seed;
        self.dp.train.seed = seed;
        self.ner.train.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Vec<AnnotatedSentence>,
    pub dev: Vec<AnnotatedSentence>,
    pub test: Vec<AnnotatedSentence>,
}

/// Tagset from the config, or the universal one.
pub fn load_tagset(cfg: &CorpusConfig) -> Result<PosTagSet> {
    match &cfg.tagset {
        Some(p) => PosTagSet::load(p),
        None => Ok(PosTagSet::universal()),
    }
}

/// Loads or generates the corpus and splits it into train, dev and test.
pub fn prepare_data(cfg: &PipelineConfig, tagset: &PosTagSet) -> Result<Splits> {
    let corpus = match &cfg.corpus.path {
        Some(p) => load_corpus(p, tagset)?,
        None => {
            let lexicon = match &cfg.corpus.lexicon {
                Some(p) => Lexicon::load(p)?,
                None => Lexicon::fashion(),
            };
            let templates = match &cfg.corpus.templates {
                Some(p) => load_templates(p)?,
                None => fashion_templates(),
            };
            generate_corpus(&lexicon, &templates, tagset, cfg.corpus.size, cfg.corpus.seed)?
        }
    };
    let (train, test) = split_dataset(corpus, cfg.split.train_ratio, cfg.split.seed)?;
    let (train, dev) = if cfg.split.dev_ratio > 0.0 {
        split_dataset(train, 1.0 - cfg.split.dev_ratio, cfg.split.seed.wrapping_add(1))?
    } else {
        (train, Vec::new())
    };
    if train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    Ok(Splits { train, dev, test })
}

pub fn train_embeddings(train: &[AnnotatedSentence], cfg: &SkipGramConfig) -> Result<(WordVectors, Vec<f64>)> {
    let sentences: Vec<Vec<Token>> = train.iter().map(|s| s.tokens.clone()).collect();
    let vocab = build_vocab(&sentences, cfg.min_count)?;
    let out = train_skipgram(&sentences, &vocab, cfg)?;
    Ok((WordVectors::new(vocab, out.table)?, out.epoch_losses))
}

fn matrix_hash(v: &WordVectors) -> String {
    let mut h = Sha256::new();
    for x in v.matrix() {
        h.update(x.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Files and in-memory parameter hashes of the stages trained so far.
struct FrozenSet {
    stages: Vec<(String, PathBuf, String, String)>,
}

impl FrozenSet {
    fn push(&mut self, stage: &str, file: PathBuf, param_hash: String) -> Result<()> {
        let file_hash = file_sha256(&file)?;
        self.stages.push((stage.into(), file, file_hash, param_hash));
        Ok(())
    }

    /// Re-hashes every frozen stage after `trained` finished; any change is
    /// an invariant breach.
    fn verify(&self, trained: &str, current: &[(&str, String)], log: &mut Vec<FreezeCheck>) -> Result<()> {
        for (stage, file, before, params) in &self.stages {
            let after = file_sha256(file)?;
            let params_now = current.iter().find(|(s, _)| s == stage).map(|(_, h)| h);
            log.push(FreezeCheck {
                trained: trained.into(),
                upstream: stage.clone(),
                before: before.clone(),
                after: after.clone(),
            });
            if &after != before || params_now.is_some_and(|h| h != params) {
                return Err(Error::FrozenMutation(stage.clone()));
            }
        }
        Ok(())
    }
}

/// Trains embeddings, PoS, DP and NER in order into `out_dir`, checking after
/// each stage that every upstream file and parameter set is unchanged, then
/// evaluates on the test split and writes the manifest and report.
pub fn train_pipeline(cfg: &PipelineConfig, out_dir: &Path) -> Result<(ModelBundle, PipelineReport)> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let tagset = load_tagset(&cfg.corpus).map_err(|e| e.in_stage("corpus"))?;
    let splits = prepare_data(cfg, &tagset).map_err(|e| e.in_stage("corpus"))?;
    save_corpus(&splits.test, &out_dir.join(TEST_FILE))?;

    let mut report = PipelineReport::default();
    let mut frozen = FrozenSet { stages: Vec::new() };
    let mut manifest = Manifest {
        version: MANIFEST_VERSION,
        stages: Vec::new(),
    };
    let mut record = |stage: &str, file: &str, config: serde_json::Value| -> Result<()> {
        manifest.stages.push(ManifestEntry {
            stage: stage.into(),
            file: file.into(),
            sha256: file_sha256(&out_dir.join(file))?,
            config,
        });
        Ok(())
    };

    let (vectors, losses) = train_embeddings(&splits.train, &cfg.embeddings).map_err(|e| e.in_stage("embeddings"))?;
    report.corpus = Some(CorpusSummary {
        train: splits.train.len(),
        dev: splits.dev.len(),
        test: splits.test.len(),
        vocabulary: vectors.vocab.len(),
    });
    report.embedding_losses = losses;
    let emb_path = out_dir.join(EMBEDDINGS_FILE);
    vectors.save(&emb_path)?;
    frozen.push("embeddings", emb_path, matrix_hash(&vectors))?;
    record("embeddings", EMBEDDINGS_FILE, serde_json::to_value(&cfg.embeddings)?)?;

    let stage = "pos";
    let (pos, training) =
        train_pos(&splits.train, &splits.dev, &vectors, &tagset, &cfg.pos).map_err(|e| e.in_stage(stage))?;
    frozen.verify(
        stage,
        &[("embeddings", matrix_hash(&vectors))],
        &mut report.freeze_checks,
    )?;
    pos.save(&out_dir.join(POS_FILE))?;
    frozen.push(stage, out_dir.join(POS_FILE), pos.labeler.param_hash())?;
    record(stage, POS_FILE, serde_json::to_value(&cfg.pos)?)?;
    report.pos = Some(StageResult {
        model: model_name(cfg.pos.encoder),
        features: "WORD".into(),
        metrics: eval_pos(&pos, &vectors, &splits.test).map_err(|e| e.in_stage(stage))?,
        training: Some(training),
    });

    let stage = "dp";
    let (dp, training) =
        train_dp(&splits.train, &splits.dev, &vectors, &tagset, &cfg.dp).map_err(|e| e.in_stage(stage))?;
    let current = |pos: &PosModel, dp: Option<&DpModel>| {
        let mut v = vec![("embeddings", matrix_hash(&vectors)), ("pos", pos.labeler.param_hash())];
        if let Some(dp) = dp {
            v.push(("dp", dp.labeler.param_hash()));
        }
        v
    };
    frozen.verify(stage, &current(&pos, None), &mut report.freeze_checks)?;
    dp.save(&out_dir.join(DP_FILE))?;
    frozen.push(stage, out_dir.join(DP_FILE), dp.labeler.param_hash())?;
    record(stage, DP_FILE, serde_json::to_value(&cfg.dp)?)?;
    report.dp = Some(StageResult {
        model: model_name(cfg.dp.encoder),
        features: if cfg.dp.use_pos { "WORD+POS" } else { "WORD" }.into(),
        metrics: eval_dp(&dp, &vectors, &splits.test, PosSource::Tagger(&pos)).map_err(|e| e.in_stage(stage))?,
        training: Some(training),
    });

    let stage = "ner";
    let mut configs = vec![cfg.ner.features];
    if cfg.ner_ablation {
        configs = FeatureConfig::ALL.to_vec();
    }
    let mut bundled = None;
    for features in configs {
        let ner_cfg = NerConfig {
            features,
            ..cfg.ner.clone()
        };
        let (ner, training) =
            train_ner(&splits.train, &splits.dev, &vectors, &tagset, &ner_cfg).map_err(|e| e.in_stage(stage))?;
        frozen.verify(stage, &current(&pos, Some(&dp)), &mut report.freeze_checks)?;
        let upstream = Upstream::Models { pos: &pos, dp: &dp };
        report.ner.push(NerResult {
            config: features,
            result: StageResult {
                model: model_name(ner_cfg.encoder),
                features: features.to_string(),
                metrics: eval_ner(&ner, &vectors, &splits.test, upstream).map_err(|e| e.in_stage(stage))?,
                training: Some(training),
            },
        });
        if features == cfg.ner.features {
            bundled = Some(ner);
        }
    }
    let ner = bundled.expect("bundled configuration is always trained");
    ner.save(&out_dir.join(NER_FILE))?;
    record(stage, NER_FILE, serde_json::to_value(&cfg.ner)?)?;
    frozen.verify("bundle", &current(&pos, Some(&dp)), &mut report.freeze_checks)?;

    manifest.save(out_dir)?;
    export_report(&report, &out_dir.join(REPORT_FILE))?;
    let bundle = ModelBundle {
        dir: out_dir.to_path_buf(),
        manifest,
        vectors,
        pos,
        dp,
        ner,
    };
    Ok((bundle, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRun {
    pub features: FeatureConfig,
    pub seed: u64,
    pub accuracy: f64,
}

/// Trains NER under each feature configuration and seed on top of fixed
/// upstream models, scoring with predicted upstream features.
pub fn ner_ablation(
    splits: &Splits,
    vectors: &WordVectors,
    tagset: &PosTagSet,
    pos: &PosModel,
    dp: &DpModel,
    base: &NerConfig,
    seeds: &[u64],
) -> Result<Vec<AblationRun>> {
    let mut runs = Vec::new();
    for &seed in seeds {
        for features in FeatureConfig::ALL {
            let mut cfg = NerConfig {
                features,
                ..base.clone()
            };
            cfg.train.seed = seed;
            let (ner, _) = train_ner(&splits.train, &splits.dev, vectors, tagset, &cfg)?;
            let m = eval_ner(&ner, vectors, &splits.test, Upstream::Models { pos, dp })?;
            runs.push(AblationRun {
                features,
                seed,
                accuracy: m.accuracy,
            });
        }
    }
    Ok(runs)
}

/// Mean accuracy per configuration, in [`FeatureConfig::ALL`] order.
pub fn ablation_means(runs: &[AblationRun]) -> Vec<(FeatureConfig, f64)> {
    FeatureConfig::ALL
        .into_iter()
        .filter_map(|f| {
            let acc: Vec<f64> = runs.iter().filter(|r| r.features == f).map(|r| r.accuracy).collect();
            (!acc.is_empty()).then(|| (f, acc.iter().sum::<f64>() / acc.len() as f64))
        })
        .collect()
}
