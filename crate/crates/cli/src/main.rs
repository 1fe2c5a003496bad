//! `transeg`: preprocessing, training, evaluation, strategy sweeps, random
//! search and reporting for translation-conditioned segmentation models.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use transeg::alignment::{evaluate_alignment, parse_pharaoh_file};
use transeg::corpus::{preprocess, write_instances, IgtSchema, LanguageRules};
use transeg::experiment::{
    experiment_reports, load_instances, parse_runs_csv, random_search, run_experiment, run_sweep, ExperimentError, ExperimentSpec, KvConfig, SampledConfig, SearchSpace,
};
use transeg::model::{ConfigError, SegModel, TranslationData};
use transeg::train::{evaluate, format_metrics, write_predictions, F1Mode};
use transeg::trans_repr::load_embeddings;

#[derive(Parser)]
#[command(name = "transeg", version, about = "Translation-conditioned canonical morphological segmentation")]
struct Cli {
    /// Random seed (sets `experiment.seeds` and `preprocess.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Key-value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse IGT, extract word instances and write train/dev/test splits.
    Preprocess {
        /// IGT file (`data.igt`).
        #[arg(long)]
        igt: Option<PathBuf>,
        /// Language name or code selecting word-internal characters (`preprocess.language`).
        #[arg(long)]
        language: Option<String>,
    },
    /// Score predicted word alignments against gold alignments.
    AlignEval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// Train and evaluate every configuration, limit and seed of the spec.
    Train(RunArgs),
    /// Evaluate a checkpoint on an instance file.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Instance TSV to evaluate on.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        alignments: Option<PathBuf>,
        /// Morpheme separator (`eval.separator`).
        #[arg(long)]
        separator: Option<char>,
        /// Use macro-averaged morpheme F1 (`eval.f1 = macro`).
        #[arg(long)]
        macro_f1: bool,
    },
    /// Strategy sweep on the dev set, then an optional CLS sweep.
    Sweep(RunArgs),
    /// Draw hyperparameter configurations from the random-search space.
    Search {
        /// Number of configurations (`search.n`).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Rebuild summary tables from a `runs.csv`.
    Report {
        #[arg(long)]
        runs: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    alignments: Option<PathBuf>,
    /// Comma-separated training-set sizes, `all` for the full set.
    #[arg(long)]
    limits: Option<String>,
    /// Comma-separated replicate seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Comma-separated encoder strategies (`grid.enc`).
    #[arg(long)]
    enc: Option<String>,
    /// Comma-separated decoder strategies (`grid.dec`).
    #[arg(long)]
    dec: Option<String>,
    /// Comma-separated CLS strategies (`grid.cls`).
    #[arg(long)]
    cls: Option<String>,
    #[arg(long)]
    max_epochs: Option<usize>,
    /// `pointer-generator` or `attentive-lstm`.
    #[arg(long)]
    arch: Option<String>,
    /// Extra `key=value` settings.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

enum Failure {
    Config(String),
    Data(String),
    Other(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else if matches!(e, ExperimentError::Train(_) | ExperimentError::Pool(_)) {
            Failure::Other(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn data(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| data(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| data(dir, e))?;
    }
    fs::write(path, text).map_err(|e| data(path, e))
}

fn put<T: ToString>(c: &mut KvConfig, key: &str, value: Option<T>) {
    if let Some(v) = value {
        c.set(key, v.to_string());
    }
}

fn load_config(cli: &Cli) -> Result<KvConfig, Failure> {
    let mut c = match &cli.config {
        Some(p) => KvConfig::parse(&fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?)?,
        None => KvConfig::default(),
    };
    put(&mut c, "experiment.seeds", cli.seed);
    put(&mut c, "preprocess.seed", cli.seed);
    put(&mut c, "experiment.workers", cli.workers);
    put(&mut c, "experiment.outdir", cli.outdir.as_ref().map(|p| p.display()));
    Ok(c)
}

fn apply_run_args(c: &mut KvConfig, a: &RunArgs) -> Result<(), Failure> {
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    put(c, "data.train", path(&a.train));
    put(c, "data.dev", path(&a.dev));
    put(c, "data.test", path(&a.test));
    put(c, "data.embeddings", path(&a.embeddings));
    put(c, "data.alignments", path(&a.alignments));
    put(c, "experiment.limits", a.limits.as_ref());
    put(c, "experiment.seeds", a.seeds.as_ref());
    put(c, "grid.enc", a.enc.as_ref());
    put(c, "grid.dec", a.dec.as_ref());
    put(c, "grid.cls", a.cls.as_ref());
    put(c, "train.max_epochs", a.max_epochs);
    put(c, "model.arch", a.arch.as_ref());
    for kv in &a.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        c.set(k.trim(), v.trim());
    }
    Ok(())
}

fn outdir(c: &KvConfig) -> Result<PathBuf, Failure> {
    Ok(c.get_or("experiment.outdir", PathBuf::from("."))?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Preprocess { igt, language } => {
            put(&mut cfg, "data.igt", igt.map(|p| p.display().to_string()));
            put(&mut cfg, "preprocess.language", language);
            let igt: PathBuf = cfg.require("data.igt")?;
            let rules = LanguageRules::for_language(cfg.raw("preprocess.language").unwrap_or(""));
            let rules = rules.with_word_internal(cfg.raw("preprocess.word_internal").unwrap_or("").chars());
            let seed = cfg.get_or("preprocess.seed", 0u64)?;
            let out = preprocess(&read(&igt)?, &IgtSchema::default(), &rules, seed).map_err(|e| data(&igt, e))?;
            let dir = outdir(&cfg)?;
            write(&dir.join("instances.tsv"), &write_instances(&out.instances))?;
            write(&dir.join("train.tsv"), &write_instances(&out.splits.train))?;
            write(&dir.join("dev.tsv"), &write_instances(&out.splits.dev))?;
            write(&dir.join("test.tsv"), &write_instances(&out.splits.test))?;
            let translations: String = out.sentences.iter().map(|s| format!("{}\t{}\n", s.id, s.translation.join(" "))).collect();
            write(&dir.join("translations.tsv"), &translations)?;
            println!(
                "{} sentences, {} instances: {} train / {} dev / {} test",
                out.sentences.len(),
                out.instances.len(),
                out.splits.train.len(),
                out.splits.dev.len(),
                out.splits.test.len()
            );
        }
        Command::AlignEval { pred, gold } => {
            let p = parse_pharaoh_file(&read(&pred)?).map_err(|e| data(&pred, e))?;
            let g = parse_pharaoh_file(&read(&gold)?).map_err(|e| data(&gold, e))?;
            let s = evaluate_alignment(&p, &g).map_err(|e| data(&pred, e))?;
            let text = format_metrics([("precision", s.precision), ("recall", s.recall), ("f1", s.f1)]);
            if cli.outdir.is_some() {
                write(&outdir(&cfg)?.join("alignment_metrics.tsv"), &text)?;
            }
            print!("{text}");
        }
        Command::Train(a) => {
            apply_run_args(&mut cfg, &a)?;
            let spec = ExperimentSpec::from_config(&cfg)?;
            let records = run_experiment(&spec)?;
            println!("{} runs written to {}", records.len(), spec.run_root().display());
            print!("{}", read(&spec.run_root().join("results.txt"))?);
        }
        Command::Evaluate {
            checkpoint,
            data: path,
            embeddings,
            alignments,
            separator,
            macro_f1,
        } => {
            put(&mut cfg, "eval.separator", separator);
            if macro_f1 {
                cfg.set("eval.f1", "macro");
            }
            let (model, _) = SegModel::<f32>::from_checkpoint(&read(&checkpoint)?).map_err(|e| data(&checkpoint, e))?;
            let instances = load_instances(&path)?;
            let translations = match (model.config().uses_translation(), embeddings) {
                (false, _) => None,
                (true, None) => return Err(Failure::Config("model uses translations; pass --embeddings".into())),
                (true, Some(e)) => {
                    let table = load_embeddings(&read(&e)?).map_err(|err| data(&e, err))?;
                    let links = match alignments {
                        Some(p) => parse_pharaoh_file(&read(&p)?).map_err(|err| data(&p, err))?,
                        None => Vec::new(),
                    };
                    Some(TranslationData::new(table, links))
                }
            };
            let sep: char = cfg.get_or("eval.separator", '-')?;
            let mode = if cfg.raw("eval.f1") == Some("macro") { F1Mode::Macro } else { F1Mode::Micro };
            let eval = evaluate(&model, &instances, translations.as_ref(), sep, mode, 64).map_err(|e| Failure::from(ExperimentError::from(e)))?;
            let metrics = format_metrics([
                ("accuracy", eval.accuracy),
                ("precision", eval.morphemes.precision),
                ("recall", eval.morphemes.recall),
                ("f1", eval.morphemes.f1),
                ("edit_distance", eval.edit_distance as f64),
            ]);
            if cli.outdir.is_some() || cfg.raw("experiment.outdir").is_some() {
                let dir = outdir(&cfg)?;
                let rows = instances.iter().zip(&eval.predictions).map(|(i, p)| (i.surface.as_str(), i.canonical.as_str(), p.as_str()));
                write(&dir.join("predictions.tsv"), &write_predictions(rows))?;
                write(&dir.join("metrics.tsv"), &metrics)?;
            }
            print!("{metrics}");
        }
        Command::Sweep(a) => {
            apply_run_args(&mut cfg, &a)?;
            let spec = ExperimentSpec::from_config(&cfg)?;
            let out = run_sweep(&spec)?;
            print!("{}", out.stage1.to_text(false));
            if let Some(s2) = &out.stage2 {
                println!();
                print!("{}", s2.to_text(true));
            }
        }
        Command::Search { n } => {
            put(&mut cfg, "search.n", n);
            let n = cfg.get_or("search.n", 10usize)?;
            let seed = cfg.list::<u64>("experiment.seeds")?.and_then(|s| s.first().copied()).unwrap_or(0);
            let draws = random_search(&SearchSpace::default(), n, seed).map_err(|e| Failure::Config(e.to_string()))?;
            let mut csv = format!("{}\n", SampledConfig::csv_header());
            for (i, d) in draws.iter().enumerate() {
                csv.push_str(&d.csv_row(i));
                csv.push('\n');
            }
            if cli.outdir.is_some() || cfg.raw("experiment.outdir").is_some() {
                write(&outdir(&cfg)?.join("search.csv"), &csv)?;
            }
            print!("{csv}");
        }
        Command::Report { runs } => {
            let records = parse_runs_csv(&read(&runs)?).map_err(|e| data(&runs, e))?;
            let dir = outdir(&cfg)?;
            for (name, text) in experiment_reports(&records) {
                write(&dir.join(name), &text)?;
            }
            print!("{}", read(&dir.join("results.txt"))?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("data error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
