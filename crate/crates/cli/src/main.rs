//! Command-line front end: train, evaluate, inspect and export
//! cross-lingual sense embeddings.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xsense::eval::{self, knn, resolve_sense};
use xsense::trainer::{init_rng, train};
use xsense::{checkpoint, export, Error, Model, ParallelCorpus, Side, TrainOptions, TrainingConfig, Vocabulary};

#[derive(Parser, Debug)]
#[command(name = "xsense", version, about = "Cross-lingual multi-sense word embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train on a line-parallel corpus and write a checkpoint.
    Train(TrainArgs),
    /// Score a contextual similarity dataset (Spearman's rho).
    Eval(EvalArgs),
    /// List nearest sense neighbors of `token#k`.
    Knn(KnnArgs),
    /// Write one language's sense embeddings in word2vec text format.
    Export(ExportArgs),
    /// Convert SCWS-style markup to the tab-separated dataset format.
    ConvertScws(ConvertArgs),
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    corpus_a: PathBuf,
    #[arg(long)]
    corpus_b: PathBuf,
    #[arg(long, default_value = "en")]
    lang_a: String,
    #[arg(long, default_value = "zh")]
    lang_b: String,
    /// Final checkpoint; per-epoch checkpoints get an `.epochN` suffix.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Continue from a saved checkpoint instead of initializing. Its
    /// vocabularies and hyperparameters are kept; only --epochs applies.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    min_count: u64,
    #[arg(long)]
    lowercase_a: bool,
    #[arg(long)]
    lowercase_b: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 10_000)]
    report_interval: u64,
    /// Progress records go here instead of standard output.
    #[arg(long)]
    progress: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 20)]
    bilingual_sample: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 25)]
    negatives: usize,
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    #[arg(long, default_value_t = 512)]
    batch: usize,
    #[arg(long, default_value_t = 300)]
    dim: usize,
    #[arg(long, default_value_t = 3)]
    senses: usize,
    #[arg(long, default_value_t = 5)]
    epochs: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    subsample: f64,
}

impl From<&ConfigArgs> for TrainingConfig {
    fn from(a: &ConfigArgs) -> Self {
        TrainingConfig {
            alpha: a.alpha,
            window: a.window,
            bilingual_sample: a.bilingual_sample,
            epsilon: a.epsilon,
            lambda: a.lambda,
            negatives: a.negatives,
            lr: a.lr,
            batch: a.batch,
            dim: a.dim,
            senses: a.senses,
            epochs: a.epochs,
            seed: a.seed,
            subsample: a.subsample,
        }
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Local window for decoding; defaults to the training window.
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args, Debug)]
struct KnnArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Sense label, e.g. `bank#0`.
    #[arg(long)]
    query: String,
    /// Language of the query token.
    #[arg(long)]
    lang: String,
    /// Language to search; defaults to the query language.
    #[arg(long)]
    target_lang: Option<String>,
    #[arg(short, long, default_value_t = 10)]
    n: usize,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    lang: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Language tag written for both sentences.
    #[arg(long, default_value = "en")]
    lang: String,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => 2,
        Error::LanguageMismatch { .. } => 3,
        Error::UnknownToken { .. } => 4,
        _ => 1,
    }
}

fn build_vocab(path: &Path, min_count: u64, lowercase: bool) -> xsense::Result<Vocabulary> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_owned(),
        source: e,
    })?;
    Vocabulary::build(BufReader::new(file), min_count, lowercase)
}

fn cmd_train(args: &TrainArgs) -> xsense::Result<()> {
    for path in [&args.corpus_a, &args.corpus_b] {
        if !path.exists() {
            return Err(Error::Io {
                path: path.clone(),
                source: io::ErrorKind::NotFound.into(),
            });
        }
    }
    let languages = [args.lang_a.clone(), args.lang_b.clone()];
    let mut model = match &args.resume {
        Some(path) => {
            let mut model = checkpoint::load(path)?;
            model.config.epochs = args.config.epochs;
            model
        }
        None => {
            let config = TrainingConfig::from(&args.config);
            config.validate()?;
            let vocabs = [
                build_vocab(&args.corpus_a, args.min_count, args.lowercase_a)?,
                build_vocab(&args.corpus_b, args.min_count, args.lowercase_b)?,
            ];
            let mut rng = init_rng(config.seed);
            Model::init(config, languages.clone(), vocabs, &mut rng)?
        }
    };
    let corpus = ParallelCorpus::load(
        &args.corpus_a,
        &args.corpus_b,
        &model.vocabs[0],
        &model.vocabs[1],
        languages,
    )?;
    log::info!(
        "{} sentence pairs ({} skipped), vocabularies {} / {}",
        corpus.len(),
        corpus.skipped(),
        model.vocabs[0].len() - 1,
        model.vocabs[1].len() - 1
    );

    let options = TrainOptions {
        checkpoint: Some(args.checkpoint.clone()),
        workers: args.workers,
        report_interval: args.report_interval,
    };
    let mut progress: Box<dyn Write> = match &args.progress {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    let summary = train(&mut model, &corpus, &options, &mut progress, &mut |_| {})?;
    progress.flush()?;
    log::info!("{} steps, checkpoint {}", summary.steps, args.checkpoint.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> xsense::Result<()> {
    let model = checkpoint::load(&args.checkpoint)?;
    let window = args.window.unwrap_or(model.config.window);
    let report = eval::evaluate_file(&model, &args.dataset, window)?;
    print!("{report}");
    Ok(())
}

fn cmd_knn(args: &KnnArgs) -> xsense::Result<()> {
    let model = checkpoint::load(&args.checkpoint)?;
    let side = model.side_of(&args.lang)?;
    let target = match &args.target_lang {
        Some(lang) => model.side_of(lang)?,
        None => side,
    };
    let query = resolve_sense(&model, side, &args.query)?;
    let mut out = io::stdout().lock();
    for (rank, nb) in knn(&model, query, target, args.n).iter().enumerate() {
        writeln!(out, "{}\t{}\t{:.6}", rank + 1, nb.label, nb.cosine)?;
    }
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> xsense::Result<()> {
    let model = checkpoint::load(&args.checkpoint)?;
    let side: Side = model.side_of(&args.lang)?;
    export::export_senses(model.side_params(side), model.vocab(side), &args.output)
}

fn cmd_convert(args: &ConvertArgs) -> xsense::Result<()> {
    let input = File::open(&args.input).map_err(|e| Error::Io {
        path: args.input.clone(),
        source: e,
    })?;
    let output = File::create(&args.output).map_err(|e| Error::Io {
        path: args.output.clone(),
        source: e,
    })?;
    let mut writer = BufWriter::new(output);
    let n = eval::convert_scws(BufReader::new(input), &mut writer, &args.lang)?;
    writer.flush()?;
    log::info!("wrote {n} items to {}", args.output.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Knn(a) => cmd_knn(a),
        Command::Export(a) => cmd_export(a),
        Command::ConvertScws(a) => cmd_convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
