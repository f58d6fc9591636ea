use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use fashion_parser::pos::PosModel;
use serde_json::Value;
use tempfile::TempDir;

const TINY_CONFIG: &str = r#"{
  "corpus": {"size": 200},
  "embeddings": {"dim": 16, "epochs": 2, "min_count": 1},
  "pos": {"hidden": 8, "train": {"max_epochs": 2, "lr": 0.01}},
  "dp": {"hidden": 8, "d_pos": 4, "train": {"max_epochs": 2, "lr": 0.01}},
  "ner": {"hidden": 8, "d_pos": 4, "d_op": 3, "train": {"max_epochs": 2, "lr": 0.01}}
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fashion-parser"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Corpus, embeddings, config and a trained bundle shared by every test.
struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        std::fs::write(f.path("tiny.json"), TINY_CONFIG).unwrap();
        ok(&[
            "generate",
            "--n",
            "200",
            "--seed",
            "3",
            "--out",
            s(&f.path("corpus.jsonl")),
        ]);
        ok(&[
            "train-embeddings",
            "--corpus",
            s(&f.path("corpus.jsonl")),
            "--config",
            s(&f.path("tiny.json")),
            "--out",
            s(&f.path("emb.txt")),
        ]);
        ok(&[
            "train-all",
            "--config",
            s(&f.path("tiny.json")),
            "--seed",
            "5",
            "--out",
            s(&f.path("bundle")),
        ]);
        f
    })
}

#[test]
fn generate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let c = dir.path().join("c.jsonl");
    ok(&["generate", "--n", "10", "--seed", "1", "--out", s(&a)]);
    ok(&["generate", "--n", "10", "--seed", "1", "--out", s(&b)]);
    ok(&["generate", "--n", "10", "--seed", "2", "--out", s(&c)]);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_ne!(text, std::fs::read_to_string(&c).unwrap());
}

#[test]
fn nearest_prints_sorted_rows() {
    let f = fixture();
    let out = ok(&[
        "nearest",
        "--embeddings",
        s(&f.path("emb.txt")),
        "--word",
        "hat",
        "--k",
        "5",
    ]);
    let sims: Vec<f64> = out
        .lines()
        .map(|l| {
            let (w, sim) = l.split_once('\t').unwrap();
            assert!(!w.is_empty() && w != "hat");
            sim.parse().unwrap()
        })
        .collect();
    assert_eq!(sims.len(), 5);
    assert!(sims.windows(2).all(|w| w[0] >= w[1]));

    let missing = run(&["nearest", "--embeddings", s(&f.path("emb.txt")), "--word", "zzzz"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn stage_trainers_and_tag() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let common = |out: &Path| {
        vec![
            "--corpus".to_string(),
            s(&f.path("corpus.jsonl")).to_string(),
            "--embeddings".to_string(),
            s(&f.path("emb.txt")).to_string(),
            "--config".to_string(),
            s(&f.path("tiny.json")).to_string(),
            "--out".to_string(),
            s(out).to_string(),
            "--seed".to_string(),
            "4".to_string(),
        ]
    };
    let with = |cmd: &str, out: &Path, extra: &[&str]| {
        let mut args = vec![cmd.to_string()];
        args.extend(common(out));
        args.extend(extra.iter().map(|a| a.to_string()));
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(&refs);
    };

    let pos = dir.path().join("pos.model");
    with("train-pos", &pos, &["--hidden", "6"]);
    // flags win over the config file, which wins over defaults
    let model = PosModel::load(&pos).unwrap();
    assert_eq!(model.labeler.config.hidden, 6);
    assert_eq!(model.labeler.config.word_dim, 16);

    with("train-dp", &dir.path().join("dp.model"), &["--no-pos", "--epochs", "1"]);
    with("train-ner", &dir.path().join("ner.model"), &["--features", "word+pos"]);
    let bad = run(&[
        "train-ner",
        "--corpus",
        s(&f.path("corpus.jsonl")),
        "--embeddings",
        s(&f.path("emb.txt")),
        "--out",
        s(&dir.path().join("x.model")),
        "--features",
        "word+dp",
    ]);
    assert_eq!(bad.status.code(), Some(1));

    let cols = ok(&[
        "tag",
        "--model",
        s(&pos),
        "--embeddings",
        s(&f.path("emb.txt")),
        "Red Dress,",
    ]);
    let rows: Vec<Vec<&str>> = cols.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "red");
    assert!(rows.iter().all(|r| r.len() == 3));

    let json: Value = serde_json::from_str(&ok(&[
        "tag",
        "--json",
        "--model",
        s(&pos),
        "--embeddings",
        s(&f.path("emb.txt")),
        "red",
        "dress",
    ]))
    .unwrap();
    let first = &json[0];
    assert!(first["token"].is_string() && first["pos"].is_string() && first["confidence"].is_f64());
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn parse_outputs() {
    let f = fixture();
    let bundle = f.path("bundle");
    let b = s(&bundle);

    let raw = ok(&["parse", "--bundle", b, "black gucci bag", "--json"]);
    assert_eq!(raw, ok(&["parse", "--bundle", b, "black gucci bag", "--json"]));
    let v: Value = serde_json::from_str(&raw).unwrap();
    assert_eq!(keys(&v), ["tokens"]);
    let tokens = v["tokens"].as_array().unwrap();
    assert_eq!(tokens.len(), 3);
    for t in tokens {
        assert_eq!(keys(t), ["head", "ner", "op", "pos", "surface"]);
        for part in ["pos", "op", "ner"] {
            assert_eq!(keys(&t[part]), ["confidence", "label"]);
            let c = t[part]["confidence"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&c));
        }
    }

    let deps = ok(&["parse", "--bundle", b, "--deps", "red dress from gucci"]);
    let heads: Vec<i32> = deps
        .lines()
        .map(|l| l.split('\t').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(heads.len(), 4);
    assert!(fashion_parser::tree::validate(&heads).is_ok());

    let traced = ok(&["parse", "--bundle", b, "--trace", "red dress"]);
    assert!(traced.lines().any(|l| l.starts_with("init")));
    assert!(traced.lines().any(|l| l.starts_with("SHIFT red")));

    let json_trace = run(&["parse", "--bundle", b, "--trace", "--json", "red dress"]);
    assert!(json_trace.status.success());
    serde_json::from_slice::<Value>(&json_trace.stdout).unwrap();
    assert!(String::from_utf8_lossy(&json_trace.stderr).contains("SHIFT"));

    let ner = ok(&["recognize", "--bundle", b, "golden goose"]);
    let labels = ["BRAND", "CATEGORY", "COLOUR", "ATTRIBUTE", "UNKNOWN"];
    assert!(ner.lines().all(|l| labels.contains(&l.split('\t').nth(1).unwrap())));

    let empty: Value = serde_json::from_str(&ok(&["parse", "--bundle", b, "--json", "..."])).unwrap();
    assert_eq!(empty["tokens"].as_array().unwrap().len(), 0);
}

#[test]
fn eval_and_export_report() {
    let f = fixture();
    let b = f.path("bundle");
    let rows: Value = serde_json::from_str(&ok(&["eval", "--bundle", s(&b), "--json"])).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(keys(r), ["accuracy", "f1", "features", "model", "task"]);
    }
    let table = ok(&["eval", "--bundle", s(&b), "--test", s(&f.path("corpus.jsonl"))]);
    assert!(table.starts_with("| Task"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let printed = ok(&["export-report", "--bundle", s(&b), "--out", s(&out)]);
    assert_eq!(printed.lines().filter(|l| l.starts_with("| NER")).count(), 3);
    assert_eq!(std::fs::read_to_string(out.with_extension("md")).unwrap(), printed);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn train_all_respects_seed_and_flags() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let printed = ok(&[
        "train-all",
        "--config",
        s(&f.path("tiny.json")),
        "--seed",
        "5",
        "--no-ablation",
        "--json",
        "--out",
        s(&out),
    ]);
    let rows: Value = serde_json::from_str(&printed).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    // same seed, same upstream files as the shared bundle
    for file in ["embeddings.txt", "pos.model", "dp.model", "ner.model"] {
        assert_eq!(
            std::fs::read(out.join(file)).unwrap(),
            std::fs::read(f.path("bundle").join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn exit_codes() {
    let unknown = run(&["generate", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["parse", "--bundle", s(&dir.path().join("none")), "red dress"]);
    assert_eq!(missing.status.code(), Some(1));
    let err = String::from_utf8(missing.stderr).unwrap();
    assert!(err.starts_with("error: "));
    assert_eq!(err.trim_end().lines().count(), 1);
    assert!(run(&["--help"]).status.success());
}
