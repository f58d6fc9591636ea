//! Trained model bundle: a directory of stage files plus a hash manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::normalize_tokenize;
use crate::dep::DpModel;
use crate::embeddings::WordVectors;
use crate::error::{Error, Result};
use crate::ner::NerModel;
use crate::pos::PosModel;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const POS_FILE: &str = "pos.model";
pub const DP_FILE: &str = "dp.model";
pub const NER_FILE: &str = "ner.model";
pub const REPORT_FILE: &str = "report.json";
pub const TEST_FILE: &str = "test.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub stage: String,
    pub file: String,
    pub sha256: String,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub stages: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn entry(&self, stage: &str) -> Option<&ManifestEntry> {
        self.stages.iter().find(|e| e.stage == stage)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Format(format!(
                "manifest version {}, expected {MANIFEST_VERSION}",
                m.version
            )));
        }
        Ok(m)
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub vectors: WordVectors,
    pub pos: PosModel,
    pub dp: DpModel,
    pub ner: NerModel,
}

impl ModelBundle {
    /// Loads every stage, refusing files whose hash differs from the manifest.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = Manifest::load(dir)?;
        let file = |stage: &str| -> Result<PathBuf> {
            let e = manifest
                .entry(stage)
                .ok_or_else(|| Error::Format(format!("manifest has no `{stage}` stage")))?;
            let path = dir.join(&e.file);
            let hash = file_sha256(&path)?;
            if hash != e.sha256 {
                return Err(Error::Format(format!(
                    "{} does not match its manifest hash",
                    path.display()
                )));
            }
            Ok(path)
        };
        Ok(ModelBundle {
            vectors: WordVectors::load(&file("embeddings")?)?,
            pos: PosModel::load(&file("pos")?)?,
            dp: DpModel::load(&file("dp")?)?,
            ner: NerModel::load(&file("ner")?)?,
            manifest,
            dir: dir.to_path_buf(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub label: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenAnalysis {
    pub surface: String,
    pub pos: Scored,
    pub op: Scored,
    pub head: i32,
    pub ner: Scored,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QueryAnalysis {
    pub tokens: Vec<TokenAnalysis>,
}

/// Tokenizes `text` and runs PoS tagging, operation labelling and entity
/// recognition, each stage fed the previous stages' predictions.
pub fn parse_query(bundle: &ModelBundle, text: &str) -> Result<QueryAnalysis> {
    let tokens = normalize_tokenize(text);
    if tokens.is_empty() {
        return Ok(QueryAnalysis::default());
    }
    let v = &bundle.vectors;
    let tagged = bundle.pos.tag(v, &tokens)?;
    let tags: Vec<String> = tagged.iter().map(|t| t.pos.clone()).collect();
    let parse = bundle.dp.parse_deps(v, &tokens, Some(&tags))?;
    let ops: Vec<_> = parse.ops.iter().map(|o| o.label).collect();
    let entities = bundle.ner.recognize(v, &tokens, Some(&tags), Some(&ops))?;
    let tokens = tagged
        .into_iter()
        .zip(&parse.ops)
        .zip(&parse.heads)
        .zip(entities)
        .map(|(((p, o), &head), e)| TokenAnalysis {
            surface: p.token,
            pos: Scored {
                label: p.pos,
                confidence: p.confidence,
            },
            op: Scored {
                label: o.label.as_str().into(),
                confidence: o.confidence,
            },
            head,
            ner: Scored {
                label: e.label.as_str().into(),
                confidence: e.confidence,
            },
        })
        .collect();
    Ok(QueryAnalysis { tokens })
}
