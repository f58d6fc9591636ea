//! Consolidated metrics report and its exported forms.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dep::DpMetrics;
use crate::error::{Error, Result};
use crate::labeler::{EncoderKind, TrainReport};
use crate::metrics::Metrics;
use crate::ner::FeatureConfig;

/// One line of the results grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task: String,
    pub model: String,
    pub features: String,
    pub accuracy: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResult<M> {
    pub model: String,
    pub features: String,
    pub metrics: M,
    /// Absent when the model was only evaluated.
    pub training: Option<TrainReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerResult {
    pub config: FeatureConfig,
    pub result: StageResult<Metrics>,
}

/// Upstream file hash before and after a downstream stage trained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezeCheck {
    pub trained: String,
    pub upstream: String,
    pub before: String,
    pub after: String,
}

impl FreezeCheck {
    pub fn holds(&self) -> bool {
        self.before == self.after
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub vocabulary: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineReport {
    pub corpus: Option<CorpusSummary>,
    pub embedding_losses: Vec<f64>,
    pub pos: Option<StageResult<Metrics>>,
    pub dp: Option<StageResult<DpMetrics>>,
    pub ner: Vec<NerResult>,
    pub freeze_checks: Vec<FreezeCheck>,
}

/// Grid name of an encoder with its CRF head.
pub fn model_name(encoder: EncoderKind) -> String {
    match encoder {
        EncoderKind::Lstm => "LSTM+CRF".into(),
        EncoderKind::Bilstm => "BI-LSTM+CRF".into(),
    }
}

impl PipelineReport {
    /// Grid rows for the stages that ran; accuracy and support-weighted F1.
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows = Vec::new();
        let mut push = |task: &str, model: &str, features: &str, m: &Metrics| {
            rows.push(ReportRow {
                task: task.into(),
                model: model.into(),
                features: features.into(),
                accuracy: m.accuracy,
                f1: m.f1_weighted,
            })
        };
        if let Some(p) = &self.pos {
            push("POS", &p.model, &p.features, &p.metrics);
        }
        if let Some(d) = &self.dp {
            push("DP", &d.model, &d.features, &d.metrics.ops);
        }
        for n in &self.ner {
            push("NER", &n.result.model, &n.result.features, &n.result.metrics);
        }
        rows
    }

    pub fn ner_accuracy(&self, config: FeatureConfig) -> Option<f64> {
        self.ner
            .iter()
            .find(|n| n.config == config)
            .map(|n| n.result.metrics.accuracy)
    }

    /// Human-readable grid with columns Task, Model, Features, Accuracy, F1.
    pub fn table(&self) -> String {
        let mut out = String::from("| Task | Model | Features | Accuracy | F1 |\n|---|---|---|---|---|\n");
        for r in self.rows() {
            writeln!(
                out,
                "| {} | {} | {} | {:.4} | {:.4} |",
                r.task, r.model, r.features, r.accuracy, r.f1
            )
            .expect("writing to a string");
        }
        if let Some(d) = &self.dp {
            writeln!(out, "\nDP unlabelled attachment score: {:.4}", d.metrics.uas).expect("writing to a string");
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ExportedReport {
    rows: Vec<ReportRow>,
    report: PipelineReport,
}

/// Companion path of the human-readable table.
pub fn table_path(path: &Path) -> PathBuf {
    path.with_extension("md")
}

/// Writes the report as JSON at `path` and the grid as Markdown beside it.
pub fn export_report(report: &PipelineReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(&ExportedReport {
        rows: report.rows(),
        report: report.clone(),
    })?;
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    let table = table_path(path);
    std::fs::write(&table, report.table()).map_err(|e| Error::io(&table, e))
}

pub fn load_report(path: &Path) -> Result<PipelineReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let exported: ExportedReport = serde_json::from_str(&text)?;
    Ok(exported.report)
}
