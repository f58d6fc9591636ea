use std::path::Path;

use anyhow::{bail, Context, Result};
use fashion_parser::corpus::{
    generate_corpus, load_corpus, load_templates, normalize_tokenize, save_corpus, split_dataset, AnnotatedSentence,
    Lexicon, PosTagSet, Token,
};
use fashion_parser::dep::{eval_dp, run_transition_executor, train_dp, OpLabel, Transition};
use fashion_parser::embeddings::{nearest, WordVectors};
use fashion_parser::labeler::{EncoderKind, TrainConfig, TrainReport};
use fashion_parser::ner::{eval_ner, train_ner, NerModel, Upstream};
use fashion_parser::pipeline::{
    export_report, load_report, model_name, parse_query, train_embeddings, train_pipeline, ModelBundle, NerResult,
    PipelineConfig, PipelineReport, QueryAnalysis, StageResult, REPORT_FILE, TEST_FILE,
};
use fashion_parser::pos::{eval_pos, train_pos, PosModel, PosSource};

use crate::*;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::TrainEmbeddings(a) => embeddings(a),
        Command::Nearest(a) => neighbours(a),
        Command::TrainPos(a) => pos(a),
        Command::TrainDp(a) => dp(a),
        Command::TrainNer(a) => ner(a),
        Command::TrainAll(a) => all(a),
        Command::Tag(a) => tag(a),
        Command::Recognize(a) => recognize(a),
        Command::Parse(a) => parse(a),
        Command::Eval(a) => eval(a),
        Command::ExportReport(a) => export(a),
    }
}

fn base_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(PipelineConfig::default()),
    }
}

fn tagset(path: Option<&Path>) -> Result<PosTagSet> {
    Ok(match path {
        Some(p) => PosTagSet::load(p)?,
        None => PosTagSet::universal(),
    })
}

fn generate(a: GenerateArgs) -> Result<()> {
    let tags = tagset(a.source.tagset.as_deref())?;
    let lexicon = match &a.source.lexicon {
        Some(p) => Lexicon::load(p)?,
        None => Lexicon::fashion(),
    };
    let templates = match &a.source.templates {
        Some(p) => load_templates(p)?,
        None => fashion_parser::corpus::fashion_templates(),
    };
    let corpus = generate_corpus(&lexicon, &templates, &tags, a.n, a.seed)?;
    save_corpus(&corpus, &a.out)?;
    eprintln!("wrote {} sentences to {}", corpus.len(), a.out.display());
    Ok(())
}

fn embeddings(a: TrainEmbeddingsArgs) -> Result<()> {
    let mut cfg = base_config(a.config.as_deref())?.embeddings;
    set(&mut cfg.dim, a.dim);
    set(&mut cfg.window, a.window);
    set(&mut cfg.negatives, a.negatives);
    set(&mut cfg.epochs, a.epochs);
    set(&mut cfg.lr, a.lr);
    set(&mut cfg.min_count, a.min_count);
    set(&mut cfg.seed, a.seed);
    let corpus = load_corpus(&a.corpus, &tagset(a.tagset.as_deref())?)?;
    let (vectors, losses) = train_embeddings(&corpus, &cfg)?;
    vectors.save(&a.out)?;
    for (i, l) in losses.iter().enumerate() {
        eprintln!("epoch {}\tloss {l:.6}", i + 1);
    }
    eprintln!(
        "wrote {} vectors of dimension {} to {}",
        vectors.vocab.len(),
        vectors.dim(),
        a.out.display()
    );
    Ok(())
}

fn neighbours(a: NearestArgs) -> Result<()> {
    let v = WordVectors::load(&a.embeddings)?;
    let word = a.word.to_lowercase();
    if v.vocab.get(&word).is_none() {
        bail!("`{word}` is not in the vocabulary");
    }
    for (w, sim) in nearest(&v.table, &v.vocab, &word, a.k) {
        println!("{w}\t{sim:.6}");
    }
    Ok(())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Applies the shared stage flags on top of the config-file values.
fn apply_stage(
    a: &StageArgs,
    cfg: &mut PipelineConfig,
    pick: impl Fn(&mut PipelineConfig) -> (&mut TrainConfig, &mut EncoderKind, &mut usize, &mut f64),
) {
    if let Some(r) = a.dev_ratio {
        cfg.split.dev_ratio = r;
    }
    if let Some(s) = a.seed {
        cfg.split.seed = s;
    }
    let (train, encoder, hidden, dropout) = pick(cfg);
    set(encoder, a.encoder.map(Into::into));
    set(hidden, a.hidden);
    set(dropout, a.dropout);
    set(&mut train.max_epochs, a.epochs);
    set(&mut train.batch_size, a.batch_size);
    set(&mut train.lr, a.lr);
    set(&mut train.seed, a.seed);
    if let Some(p) = a.patience {
        train.patience = (p > 0).then_some(p);
    }
}

struct StageData {
    tags: PosTagSet,
    vectors: WordVectors,
    train: Vec<AnnotatedSentence>,
    dev: Vec<AnnotatedSentence>,
}

fn stage_data(a: &StageArgs, cfg: &PipelineConfig) -> Result<StageData> {
    let tags = tagset(a.tagset.as_deref())?;
    let corpus = load_corpus(&a.corpus, &tags)?;
    let vectors = WordVectors::load(&a.embeddings)?;
    let ratio = cfg.split.dev_ratio;
    let (train, dev) = if ratio > 0.0 && corpus.len() > 1 {
        split_dataset(corpus, 1.0 - ratio, cfg.split.seed.wrapping_add(1))?
    } else {
        (corpus, Vec::new())
    };
    Ok(StageData {
        tags,
        vectors,
        train,
        dev,
    })
}

fn print_training(report: &TrainReport) {
    for e in &report.epochs {
        match e.dev_accuracy {
            Some(acc) => eprintln!("epoch {}\tloss {:.6}\tdev accuracy {acc:.4}", e.epoch, e.train_loss),
            None => eprintln!("epoch {}\tloss {:.6}", e.epoch, e.train_loss),
        }
    }
    eprintln!("best epoch {}", report.best_epoch);
}

fn pos(a: StageArgs) -> Result<()> {
    let mut cfg = base_config(a.config.as_deref())?;
    apply_stage(&a, &mut cfg, |c| {
        (
            &mut c.pos.train,
            &mut c.pos.encoder,
            &mut c.pos.hidden,
            &mut c.pos.dropout,
        )
    });
    let d = stage_data(&a, &cfg)?;
    let (model, report) = train_pos(&d.train, &d.dev, &d.vectors, &d.tags, &cfg.pos)?;
    model.save(&a.out)?;
    print_training(&report);
    Ok(())
}

fn dp(a: TrainDpArgs) -> Result<()> {
    let s = &a.stage;
    let mut cfg = base_config(s.config.as_deref())?;
    apply_stage(s, &mut cfg, |c| {
        (&mut c.dp.train, &mut c.dp.encoder, &mut c.dp.hidden, &mut c.dp.dropout)
    });
    if a.no_pos {
        cfg.dp.use_pos = false;
    }
    let d = stage_data(s, &cfg)?;
    let (model, report) = train_dp(&d.train, &d.dev, &d.vectors, &d.tags, &cfg.dp)?;
    model.save(&s.out)?;
    print_training(&report);
    Ok(())
}

fn ner(a: TrainNerArgs) -> Result<()> {
    let s = &a.stage;
    let mut cfg = base_config(s.config.as_deref())?;
    apply_stage(s, &mut cfg, |c| {
        (
            &mut c.ner.train,
            &mut c.ner.encoder,
            &mut c.ner.hidden,
            &mut c.ner.dropout,
        )
    });
    if let Some(f) = &a.features {
        cfg.ner.features = f.parse()?;
    }
    let d = stage_data(s, &cfg)?;
    let (model, report) = train_ner(&d.train, &d.dev, &d.vectors, &d.tags, &cfg.ner)?;
    model.save(&s.out)?;
    print_training(&report);
    Ok(())
}

fn print_report(report: &PipelineReport, json: bool) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(&report.rows())?);
    } else {
        print!("{}", report.table());
    }
    Ok(())
}

fn all(a: TrainAllArgs) -> Result<()> {
    let mut cfg = base_config(a.config.as_deref())?;
    if let Some(s) = a.seed {
        cfg = cfg.with_seed(s);
    }
    if a.corpus.is_some() {
        cfg.corpus.path = a.corpus.clone();
    }
    set(&mut cfg.corpus.size, a.size);
    if let Some(f) = &a.features {
        cfg.ner.features = f.parse()?;
    }
    if a.no_ablation {
        cfg.ner_ablation = false;
    }
    let (_, report) = train_pipeline(&cfg, &a.out)?;
    eprintln!("wrote bundle to {}", a.out.display());
    print_report(&report, a.json)
}

fn query_tokens(words: &[String]) -> Vec<Token> {
    normalize_tokenize(&words.join(" "))
}

fn tag(a: TagArgs) -> Result<()> {
    let model = PosModel::load(&a.model)?;
    let vectors = WordVectors::load(&a.embeddings)?;
    let tokens = query_tokens(&a.query);
    if tokens.is_empty() {
        bail!("query has no tokens");
    }
    let tagged = model.tag(&vectors, &tokens)?;
    if a.json {
        println!("{}", serde_json::to_string(&tagged)?);
    } else {
        for t in tagged {
            println!("{}\t{}\t{:.4}", t.token, t.pos, t.confidence);
        }
    }
    Ok(())
}

fn analyse(a: &QueryArgs) -> Result<QueryAnalysis> {
    let bundle = ModelBundle::load(&a.bundle).with_context(|| format!("loading bundle {}", a.bundle.display()))?;
    Ok(parse_query(&bundle, &a.query.join(" "))?)
}

fn recognize(a: QueryArgs) -> Result<()> {
    let analysis = analyse(&a)?;
    if a.json {
        let rows: Vec<_> = analysis
            .tokens
            .iter()
            .map(|t| serde_json::json!({ "token": t.surface, "label": t.ner.label, "confidence": t.ner.confidence }))
            .collect();
        println!("{}", serde_json::to_string(&rows)?);
    } else {
        for t in &analysis.tokens {
            println!("{}\t{}\t{:.4}", t.surface, t.ner.label, t.ner.confidence);
        }
    }
    Ok(())
}

fn trace_lines(analysis: &QueryAnalysis) -> Result<Vec<String>> {
    let labels: Vec<OpLabel> = analysis
        .tokens
        .iter()
        .map(|t| t.op.label.parse())
        .collect::<std::result::Result<_, _>>()?;
    let trace = run_transition_executor(&labels);
    let word = |i: usize| &analysis.tokens[i].surface;
    let mut lines = Vec::new();
    for step in &trace.steps {
        let action = match step.transition {
            None => "init".to_string(),
            Some(Transition::Shift { token }) => format!("SHIFT {}", word(token)),
            Some(Transition::LeftArc { head, dependent }) => format!("LEFT_ARC {} <- {}", word(dependent), word(head)),
            Some(Transition::RightArc { head, dependent }) => {
                format!("RIGHT_ARC {} -> {}", word(head), word(dependent))
            }
        };
        let stack: Vec<&str> = step.stack.iter().map(|&i| word(i).as_str()).collect();
        lines.push(format!(
            "{action}\tstack [{}]\tbuffer {}",
            stack.join(" "),
            step.buffer_front
        ));
    }
    for &(head, dependent) in &trace.forced {
        lines.push(format!("forced {} -> {}", word(head), word(dependent)));
    }
    Ok(lines)
}

fn parse(a: ParseArgs) -> Result<()> {
    let analysis = analyse(&a.query)?;
    if a.query.json {
        println!("{}", serde_json::to_string(&analysis)?);
    } else if a.deps {
        for t in &analysis.tokens {
            println!("{}\t{}\t{:.4}\t{}", t.surface, t.op.label, t.op.confidence, t.head);
        }
    } else {
        for t in &analysis.tokens {
            println!(
                "{}\t{}\t{:.4}\t{}\t{:.4}",
                t.surface, t.pos.label, t.pos.confidence, t.ner.label, t.ner.confidence
            );
        }
    }
    if a.trace && !analysis.tokens.is_empty() {
        for line in trace_lines(&analysis)? {
            if a.query.json {
                eprintln!("{line}");
            } else {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let bundle = ModelBundle::load(&a.bundle).with_context(|| format!("loading bundle {}", a.bundle.display()))?;
    let path = a.test.clone().unwrap_or_else(|| a.bundle.join(TEST_FILE));
    let test = load_corpus(&path, &bundle.pos.tagset)?;
    let report = evaluate(&bundle, &test)?;
    if let Some(out) = &a.out {
        export_report(&report, out)?;
    }
    print_report(&report, a.json)
}

fn evaluate(bundle: &ModelBundle, test: &[AnnotatedSentence]) -> Result<PipelineReport> {
    let v = &bundle.vectors;
    let dp_features = if bundle.dp.uses_pos() { "WORD+POS" } else { "WORD" };
    Ok(PipelineReport {
        pos: Some(StageResult {
            model: model_name(bundle.pos.labeler.config.encoder),
            features: "WORD".into(),
            metrics: eval_pos(&bundle.pos, v, test)?,
            training: None,
        }),
        dp: Some(StageResult {
            model: model_name(bundle.dp.labeler.config.encoder),
            features: dp_features.into(),
            metrics: eval_dp(&bundle.dp, v, test, PosSource::Tagger(&bundle.pos))?,
            training: None,
        }),
        ner: vec![ner_result(&bundle.ner, bundle, test)?],
        ..PipelineReport::default()
    })
}

fn ner_result(ner: &NerModel, bundle: &ModelBundle, test: &[AnnotatedSentence]) -> Result<NerResult> {
    let upstream = Upstream::Models {
        pos: &bundle.pos,
        dp: &bundle.dp,
    };
    Ok(NerResult {
        config: ner.features,
        result: StageResult {
            model: model_name(ner.labeler.config.encoder),
            features: ner.features.to_string(),
            metrics: eval_ner(ner, &bundle.vectors, test, upstream)?,
            training: None,
        },
    })
}

fn export(a: ExportReportArgs) -> Result<()> {
    let path = a.report.clone().unwrap_or_else(|| a.bundle.join(REPORT_FILE));
    let report = load_report(&path).with_context(|| format!("reading report {}", path.display()))?;
    export_report(&report, &a.out)?;
    print!("{}", report.table());
    Ok(())
}
