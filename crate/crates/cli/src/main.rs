//! Command-line front end: corpus generation, stage training, evaluation and
//! query parsing.
//!
//! Exit codes: 0 on success, 1 on a domain error (one `error:` line on
//! stderr), 2 on a usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fashion_parser::labeler::EncoderKind;

#[derive(Parser)]
#[command(
    name = "fashion-parser",
    version,
    about = "Hierarchical LSTM-CRF parser for fashion search queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an annotated corpus from the lexicon and templates.
    Generate(GenerateArgs),
    /// Train skip-gram word vectors on a corpus.
    TrainEmbeddings(TrainEmbeddingsArgs),
    /// Print the nearest neighbours of a word as `word<TAB>similarity`.
    Nearest(NearestArgs),
    /// Train the part-of-speech tagger.
    TrainPos(StageArgs),
    /// Train the operation-label dependency parser.
    TrainDp(TrainDpArgs),
    /// Train the entity recognizer.
    TrainNer(TrainNerArgs),
    /// Train every stage in order into a model bundle directory.
    TrainAll(TrainAllArgs),
    /// Tag a query with a PoS model.
    Tag(TagArgs),
    /// Print entity tags for a query using a bundle.
    Recognize(QueryArgs),
    /// Run the full pipeline on a query.
    Parse(ParseArgs),
    /// Evaluate a bundle on an annotated test file.
    Eval(EvalArgs),
    /// Write a bundle's report as JSON plus a Markdown table.
    ExportReport(ExportReportArgs),
}

#[derive(Args)]
struct CorpusSource {
    /// Lexicon file [default: built-in fashion lexicon]
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Template file [default: built-in templates]
    #[arg(long)]
    templates: Option<PathBuf>,
    /// PoS tagset file, one label per line [default: built-in 20-tag set]
    #[arg(long)]
    tagset: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of sentences
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Random seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output JSONL file
    #[arg(long, default_value = "corpus.jsonl")]
    out: PathBuf,
    #[command(flatten)]
    source: CorpusSource,
}

#[derive(Args)]
struct TrainEmbeddingsArgs {
    /// Annotated JSONL corpus
    #[arg(long)]
    corpus: PathBuf,
    /// Output embedding file
    #[arg(long, default_value = "embeddings.txt")]
    out: PathBuf,
    /// JSON pipeline config; its `embeddings` section is used [default: none]
    #[arg(long)]
    config: Option<PathBuf>,
    /// Vector dimension [default: 300]
    #[arg(long)]
    dim: Option<usize>,
    /// Context window [default: 5]
    #[arg(long)]
    window: Option<usize>,
    /// Negative samples per pair [default: 5]
    #[arg(long)]
    negatives: Option<usize>,
    /// Epochs [default: 5]
    #[arg(long)]
    epochs: Option<usize>,
    /// Initial learning rate [default: 0.025]
    #[arg(long)]
    lr: Option<f64>,
    /// Minimum word count [default: 2]
    #[arg(long)]
    min_count: Option<u64>,
    /// Random seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// PoS tagset used to validate the corpus [default: built-in 20-tag set]
    #[arg(long)]
    tagset: Option<PathBuf>,
}

#[derive(Args)]
struct NearestArgs {
    /// Embedding file
    #[arg(long)]
    embeddings: PathBuf,
    /// Query word
    #[arg(long)]
    word: String,
    /// Number of neighbours
    #[arg(long, default_value_t = 10)]
    k: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoder {
    Lstm,
    Bilstm,
}

impl From<Encoder> for EncoderKind {
    fn from(e: Encoder) -> Self {
        match e {
            Encoder::Lstm => EncoderKind::Lstm,
            Encoder::Bilstm => EncoderKind::Bilstm,
        }
    }
}

/// Flags shared by the stage trainers. Unset flags fall back to the config
/// file, then to the stage defaults.
#[derive(Args)]
struct StageArgs {
    /// Annotated JSONL training corpus
    #[arg(long)]
    corpus: PathBuf,
    /// Embedding file
    #[arg(long)]
    embeddings: PathBuf,
    /// Output model file
    #[arg(long)]
    out: PathBuf,
    /// JSON pipeline config; the stage's section is used [default: none]
    #[arg(long)]
    config: Option<PathBuf>,
    /// PoS tagset file [default: built-in 20-tag set]
    #[arg(long)]
    tagset: Option<PathBuf>,
    /// Encoder [default: lstm for pos/ner, bilstm for dp]
    #[arg(long, value_enum)]
    encoder: Option<Encoder>,
    /// Hidden units per direction [default: 100 for pos/ner, 200 for dp]
    #[arg(long)]
    hidden: Option<usize>,
    /// Dropout rate on encoder outputs [default: 0.5]
    #[arg(long)]
    dropout: Option<f64>,
    /// Maximum epochs [default: 30]
    #[arg(long)]
    epochs: Option<usize>,
    /// Sentences per batch [default: 32]
    #[arg(long)]
    batch_size: Option<usize>,
    /// RMSprop learning rate [default: 0.001]
    #[arg(long)]
    lr: Option<f64>,
    /// Early-stopping patience in epochs, 0 disables [default: 3]
    #[arg(long)]
    patience: Option<usize>,
    /// Fraction of the corpus held out for early stopping [default: 0.1]
    #[arg(long)]
    dev_ratio: Option<f64>,
    /// Seed for initialization, shuffling, dropout and the dev split [default: 1]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainDpArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Drop the PoS input feature [default: PoS is used]
    #[arg(long)]
    no_pos: bool,
}

#[derive(Args)]
struct TrainNerArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Input features: word, word+pos or word+pos+dp [default: word+pos+dp]
    #[arg(long)]
    features: Option<String>,
}

#[derive(Args)]
struct TrainAllArgs {
    /// Output bundle directory
    #[arg(long, default_value = "bundle")]
    out: PathBuf,
    /// JSON pipeline config [default: none]
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every stage [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Existing annotated corpus instead of generating one [default: generate]
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Generated corpus size [default: 10000]
    #[arg(long)]
    size: Option<usize>,
    /// Features of the bundled NER model [default: word+pos+dp]
    #[arg(long)]
    features: Option<String>,
    /// Train only the bundled NER configuration [default: all three]
    #[arg(long)]
    no_ablation: bool,
    /// Print the report as JSON rows
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TagArgs {
    /// PoS model file
    #[arg(long)]
    model: PathBuf,
    /// Embedding file
    #[arg(long)]
    embeddings: PathBuf,
    /// Print JSON instead of columns
    #[arg(long)]
    json: bool,
    /// Query text
    #[arg(required = true)]
    query: Vec<String>,
}

#[derive(Args)]
struct QueryArgs {
    /// Model bundle directory
    #[arg(long, default_value = "bundle")]
    bundle: PathBuf,
    /// Print JSON instead of columns
    #[arg(long)]
    json: bool,
    /// Query text
    #[arg(required = true)]
    query: Vec<String>,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    query: QueryArgs,
    /// Print token, operation, confidence and head columns
    #[arg(long)]
    deps: bool,
    /// Dump the transition executor's states (to stderr with --json)
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Model bundle directory
    #[arg(long, default_value = "bundle")]
    bundle: PathBuf,
    /// Annotated JSONL test file [default: the bundle's test.jsonl]
    #[arg(long)]
    test: Option<PathBuf>,
    /// Also write the report (JSON plus .md table) here [default: none]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON rows instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExportReportArgs {
    /// Model bundle directory holding report.json
    #[arg(long, default_value = "bundle")]
    bundle: PathBuf,
    /// Report file to read instead of the bundle's [default: none]
    #[arg(long)]
    report: Option<PathBuf>,
    /// Output JSON path; the table goes next to it with a .md extension
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
