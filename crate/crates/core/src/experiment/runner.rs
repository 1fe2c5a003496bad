use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::alignment::{parse_pharaoh_file, AlignmentError};
use crate::corpus::{build_vocab, read_instances, subsample, CorpusError, SegmentationInstance};
use crate::model::{ConfigError, ModelError, SegModel, TranslationData};
use crate::train::{evaluate, format_metrics, train, write_predictions, RunResult, TrainError};
use crate::trans_repr::{load_embeddings, TransReprError};

use super::report::{experiment_reports, runs_csv, SweepResult};
use super::{EvalSplit, ExperimentSpec, GridPoint, Limit};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {msg}")]
    Data { path: PathBuf, msg: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl ExperimentError {
    /// True for errors caused by the settings rather than the data.
    pub fn is_config(&self) -> bool {
        matches!(self, ExperimentError::Config(_) | ExperimentError::Train(TrainError::Config(_)) | ExperimentError::Train(TrainError::Model(ModelError::Config(_))))
    }
}

impl From<ModelError> for ExperimentError {
    fn from(e: ModelError) -> Self {
        ExperimentError::Train(e.into())
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, ExperimentError> {
    fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), ExperimentError> {
    let io = |source| ExperimentError::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

fn data_err(path: &Path, e: impl ToString) -> ExperimentError {
    ExperimentError::Data {
        path: path.to_owned(),
        msg: e.to_string(),
    }
}

/// Instances, translation inputs and the translation width.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub train: Vec<SegmentationInstance>,
    pub dev: Vec<SegmentationInstance>,
    pub test: Option<Vec<SegmentationInstance>>,
    pub translations: Option<TranslationData>,
    pub trans_dim: usize,
}

pub fn load_instances(path: &Path) -> Result<Vec<SegmentationInstance>, ExperimentError> {
    read_instances(&read_file(path)?).map_err(|e| data_err(path, e))
}

impl ExperimentData {
    pub fn load(spec: &ExperimentSpec) -> Result<Self, ExperimentError> {
        let embeddings = match &spec.embeddings_path {
            Some(p) => Some(load_embeddings(&read_file(p)?).map_err(|e: TransReprError| data_err(p, e))?),
            None => None,
        };
        let alignments = match &spec.alignments_path {
            Some(p) => parse_pharaoh_file(&read_file(p)?).map_err(|e: AlignmentError| data_err(p, e))?,
            None => Vec::new(),
        };
        let trans_dim = embeddings
            .as_ref()
            .and_then(|t| t.values().next().map(|e| e.dim))
            .unwrap_or(768);
        Ok(Self {
            train: load_instances(&spec.train_path)?,
            dev: load_instances(&spec.dev_path)?,
            test: spec.test_path.as_deref().map(load_instances).transpose()?,
            translations: embeddings.map(|e| TranslationData::new(e, alignments)),
            trans_dim,
        })
    }

    pub fn eval_set(&self, split: EvalSplit) -> &[SegmentationInstance] {
        match (split, &self.test) {
            (EvalSplit::Test, Some(t)) => t,
            _ => &self.dev,
        }
    }
}

/// Outcome of one (configuration, limit, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub point: GridPoint,
    pub limit: Limit,
    pub seed: u64,
    pub result: RunResult,
    pub best_epoch: Option<usize>,
}

pub fn run_dir(root: &Path, point: GridPoint, limit: Limit, seed: u64) -> PathBuf {
    root.join(point.label()).join(limit.to_string()).join(seed.to_string())
}

fn history_tsv(result: &RunResult) -> String {
    let mut out = String::from("epoch\tloss\tdev_accuracy\tlr\n");
    for r in &result.history {
        out.push_str(&format!("{}\t{:.6}\t{:.4}\t{:e}\n", r.epoch, r.loss, r.dev_accuracy, r.lr));
    }
    out
}

/// Trains and evaluates one configuration, writing its artifacts under
/// `dir`.
pub fn run_one(spec: &ExperimentSpec, data: &ExperimentData, point: GridPoint, limit: Limit, seed: u64, split: EvalSplit, dir: &Path) -> Result<RunRecord, ExperimentError> {
    let train_set = match limit {
        Limit::N(n) => subsample(&data.train, n, seed)?,
        Limit::All => data.train.clone(),
    };
    let mcfg = spec.model_config(point, limit, data.trans_dim)?;
    let tcfg = spec.train_config(limit, seed)?;
    let translations = if point.is_baseline() { None } else { data.translations.as_ref() };
    let (src, tgt) = build_vocab(&train_set)?;
    let mut model = SegModel::<f32>::new(mcfg, src, tgt, seed)?;
    let outcome = train(&mut model, &train_set, &data.dev, translations, &tcfg, |_| {})?;
    let eval_set = data.eval_set(split);
    let eval = evaluate(&model, eval_set, translations, spec.separator, spec.f1_mode, tcfg.eval_batch_size)?;
    let result = RunResult::new(&eval, outcome.history);

    write_file(&dir.join("model.ckpt"), &model.to_checkpoint(&tcfg.to_pairs()))?;
    let rows = eval_set.iter().zip(&eval.predictions).map(|(i, p)| (i.surface.as_str(), i.canonical.as_str(), p.as_str()));
    write_file(&dir.join("predictions.tsv"), &write_predictions(rows))?;
    write_file(&dir.join("metrics.tsv"), &format_metrics(result.metrics()))?;
    write_file(&dir.join("history.tsv"), &history_tsv(&result))?;
    Ok(RunRecord {
        point,
        limit,
        seed,
        result,
        best_epoch: outcome.best_epoch,
    })
}

/// Runs every (point, limit, seed) job on a pool of `spec.workers`
/// threads. Results come back in job order.
pub fn run_jobs(spec: &ExperimentSpec, data: &ExperimentData, points: &[GridPoint], seeds: &[u64], split: EvalSplit) -> Result<Vec<RunRecord>, ExperimentError> {
    let root = spec.run_root();
    let jobs: Vec<(GridPoint, Limit, u64)> = points
        .iter()
        .flat_map(|&p| spec.limits.iter().flat_map(move |&l| seeds.iter().map(move |&s| (p, l, s))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(p, l, s)| run_one(spec, data, p, l, s, split, &run_dir(&root, p, l, s)))
            .collect()
    })
}

/// Trains every grid cell for every limit and seed and writes per-run
/// results, per-configuration mean/std and the combined tables.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>, ExperimentError> {
    spec.validate()?;
    let data = ExperimentData::load(spec)?;
    let records = run_jobs(spec, &data, &spec.grid(), &spec.seeds, spec.eval_split)?;
    let root = spec.run_root();
    write_file(&root.join("spec.cfg"), &spec.settings.to_text())?;
    for (name, text) in experiment_reports(&records) {
        write_file(&root.join(name), &text)?;
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub stage1: SweepResult,
    pub stage2: Option<SweepResult>,
    pub records: Vec<RunRecord>,
}

/// Strategy sweep on the dev set: stage one crosses every encoder and
/// decoder strategy with CLS-None; stage two varies CLS over the
/// configurations listed in `sweep.stage2`.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepOutcome, ExperimentError> {
    spec.validate()?;
    let data = ExperimentData::load(spec)?;
    let seeds = if spec.sweep_average_seeds { spec.seeds.clone() } else { vec![spec.seeds[0]] };
    let stage1_points = spec.sweep_grid();
    let mut records = run_jobs(spec, &data, &stage1_points, &seeds, EvalSplit::Dev)?;
    let stage1 = SweepResult::from_records(&stage1_points, &spec.limits, &records);
    let root = spec.run_root();
    write_file(&root.join("sweep.csv"), &stage1.to_csv(false))?;
    write_file(&root.join("sweep.txt"), &stage1.to_text(false))?;

    let stage2_points = spec.stage2_grid();
    let stage2 = if stage2_points.is_empty() {
        None
    } else {
        let fresh: Vec<GridPoint> = stage2_points.iter().copied().filter(|p| !stage1_points.contains(p)).collect();
        records.extend(run_jobs(spec, &data, &fresh, &seeds, EvalSplit::Dev)?);
        let result = SweepResult::from_records(&stage2_points, &spec.limits, &records);
        write_file(&root.join("cls_sweep.csv"), &result.to_csv(true))?;
        write_file(&root.join("cls_sweep.txt"), &result.to_text(true))?;
        Some(result)
    };
    write_file(&root.join("spec.cfg"), &spec.settings.to_text())?;
    write_file(&root.join("runs.csv"), &runs_csv(&records))?;
    Ok(SweepOutcome { stage1, stage2, records })
}
